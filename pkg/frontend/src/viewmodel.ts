/**
 * Pure projections from service responses to what the cockpit renders.
 *
 * Nothing here re-implements a business rule: every number comes from a
 * service payload. The only client-side arithmetic is the definitional
 * multiplier re-weighting of already-returned profit/trust deltas.
 */

import type {
  EstimateResponse,
  HistoryWeek,
  MarketStatePayload,
  ValidateResponse,
} from './types';

export interface TrajectorySeries {
  weeks: number[];
  price: number[];
  trust: number[];
  weeklyProfit: number[];
  cumulativeProfit: number[];
}

export interface RepairBanner {
  kind: 'valid' | 'repaired';
  text: string;
  violations: string[];
  safePct: number;
  safeAd: number;
}

export interface ForecastCard {
  profitChange: number;
  trustChange: number;
  profitConfidencePct: number;
  trustConfidencePct: number;
  displayedValue: number;
}

/** Chart series are a pure function of the history payload. */
export function trajectorySeries(weeks: HistoryWeek[]): TrajectorySeries {
  return {
    weeks: weeks.map((w) => w.week),
    price: weeks.map((w) => w.price_after),
    trust: weeks.map((w) => w.trust_after),
    weeklyProfit: weeks.map((w) => w.profit),
    cumulativeProfit: weeks.map((w) => w.cumulative_profit),
  };
}

/** Validate response -> verdict banner with the repaired alternative. */
export function repairBanner(resp: ValidateResponse): RepairBanner {
  const safe = resp.repair.safe_action;
  if (resp.verdict.is_valid) {
    return {
      kind: 'valid',
      text: 'Action is within all business rules.',
      violations: [],
      safePct: safe.price_change_pct,
      safeAd: safe.ad_spend,
    };
  }
  return {
    kind: 'repaired',
    text: `Repaired to ${formatPct(safe.price_change_pct)} / ad ${formatMoney(safe.ad_spend)}`,
    violations: resp.verdict.violations.map((v) => v.message),
    safePct: safe.price_change_pct,
    safeAd: safe.ad_spend,
  };
}

/**
 * Multiplier-re-weighted value of an estimate, by the definition
 * value = profit_change + trust_change * multiplier. Slider at 0 shows
 * the bare profit change.
 */
export function displayedValue(est: EstimateResponse, multiplier: number): number {
  return est.profit_change + est.trust_change * multiplier;
}

export function forecastCard(est: EstimateResponse, multiplier: number): ForecastCard {
  return {
    profitChange: est.profit_change,
    trustChange: est.trust_change,
    profitConfidencePct: Math.round(est.profit_confidence * 100),
    trustConfidencePct: Math.round(est.trust_confidence * 100),
    displayedValue: displayedValue(est, multiplier),
  };
}

/** Season phase within the 52-week cycle, for the dial indicator. */
export function seasonPhase(week: number): number {
  return ((week % 52) + 52) % 52;
}

export interface StatusLine {
  week: number;
  price: string;
  trust: string;
  cumulativeProfit: string;
  seasonPhase: number;
}

export function statusLine(state: MarketStatePayload): StatusLine {
  return {
    week: state.week,
    price: formatMoney(state.price),
    trust: state.trust.toFixed(3),
    cumulativeProfit: formatMoney(state.cumulative_profit),
    seasonPhase: seasonPhase(state.week),
  };
}

export function formatPct(value: number): string {
  const sign = value > 0 ? '+' : '';
  return `${sign}${value.toFixed(1)}%`;
}

export function formatMoney(value: number): string {
  return `$${value.toLocaleString('en-US', {
    minimumFractionDigits: 2,
    maximumFractionDigits: 2,
  })}`;
}
