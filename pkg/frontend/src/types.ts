/**
 * Response shapes of the market decision service.
 *
 * These mirror the service's JSON payloads exactly; the cockpit never
 * re-derives business numbers on its own.
 */

export interface MarketStatePayload {
  week: number;
  price: number;
  trust: number;
  prev_ad_spend: number;
  cumulative_profit: number;
}

export interface ActionDraft {
  price_change_pct: number;
  ad_spend: number;
}

export interface ViolationPayload {
  rule_id: string;
  message: string;
}

export interface VerdictPayload {
  is_valid: boolean;
  violations: ViolationPayload[];
}

export interface RepairPayload {
  safe_action: ActionDraft;
  repairs: { rule_id: string; message: string }[];
  message: string;
}

export interface ValidateResponse {
  verdict: VerdictPayload;
  repair: RepairPayload;
}

export interface EstimateResponse {
  profit_change: number;
  trust_change: number;
  profit_confidence: number;
  trust_confidence: number;
  long_term_value: number;
  trust_multiplier: number;
}

export interface ActResponse {
  outcome: {
    demand: number;
    revenue: number;
    profit: number;
    trust_after: number;
    factors: Record<string, number>;
  };
  executed_action: ActionDraft;
  repairs: string[];
  state: MarketStatePayload;
}

export interface HistoryWeek {
  week: number;
  price_after: number;
  trust_after: number;
  profit: number;
  cumulative_profit: number;
  demand: number;
  executed_action: ActionDraft;
  violations: string[];
  repairs: string[];
}

export interface HistoryResponse {
  session_id: string;
  weeks: HistoryWeek[];
}

export interface MetricsPayload {
  total_profit: number;
  mean_weekly: number;
  std_weekly: number;
  sharpe: number;
  final_trust: number;
  trust_delta_pct: number;
  failure_rate_pct: number;
  violation_rate_pct: number;
}

export interface SessionResponse {
  session_id: string;
  state: MarketStatePayload;
}
