import { describe, expect, it } from 'vitest';

import type {
  EstimateResponse,
  HistoryWeek,
  ValidateResponse,
} from '../src/types';
import {
  displayedValue,
  forecastCard,
  formatMoney,
  formatPct,
  repairBanner,
  seasonPhase,
  statusLine,
  trajectorySeries,
} from '../src/viewmodel';

function historyWeek(week: number, overrides: Partial<HistoryWeek> = {}): HistoryWeek {
  return {
    week,
    price_after: 100 + week,
    trust_after: 0.7 + week / 100,
    profit: 1000 * (week + 1),
    cumulative_profit: 1000 * ((week + 1) * (week + 2)) / 2,
    demand: 800,
    executed_action: { price_change_pct: 0, ad_spend: 0 },
    violations: [],
    repairs: [],
    ...overrides,
  };
}

const overreachValidate: ValidateResponse = {
  verdict: {
    is_valid: false,
    violations: [
      { rule_id: 'price_change_window', message: 'price change 60% exceeds the +50% window' },
    ],
  },
  repair: {
    safe_action: { price_change_pct: 50, ad_spend: 0 },
    repairs: [{ rule_id: 'price_change_window', message: 'clipped to +50%' }],
    message: 'clipped to +50%',
  },
};

const estimate: EstimateResponse = {
  profit_change: 1200,
  trust_change: -0.01,
  profit_confidence: 0.82,
  trust_confidence: 0.574,
  long_term_value: -300,
  trust_multiplier: 150000,
};

describe('trajectorySeries', () => {
  it('projects one point per history week', () => {
    const weeks = [historyWeek(0), historyWeek(1), historyWeek(2)];
    const series = trajectorySeries(weeks);
    expect(series.weeks).toEqual([0, 1, 2]);
    expect(series.price).toEqual([100, 101, 102]);
    expect(series.weeklyProfit).toEqual([1000, 2000, 3000]);
    expect(series.cumulativeProfit).toEqual([1000, 3000, 6000]);
  });

  it('is deterministic: same payload, same series', () => {
    const weeks = [historyWeek(0), historyWeek(1)];
    expect(trajectorySeries(weeks)).toEqual(trajectorySeries(weeks));
  });

  it('handles an empty history', () => {
    const series = trajectorySeries([]);
    expect(series.weeks).toEqual([]);
    expect(series.trust).toEqual([]);
  });
});

describe('repairBanner', () => {
  it('shows the +60% draft repaired to +50%', () => {
    const banner = repairBanner(overreachValidate);
    expect(banner.kind).toBe('repaired');
    expect(banner.text).toContain('+50.0%');
    expect(banner.safePct).toBe(50);
    expect(banner.violations).toHaveLength(1);
  });

  it('marks a clean draft as valid with no violations', () => {
    const banner = repairBanner({
      verdict: { is_valid: true, violations: [] },
      repair: {
        safe_action: { price_change_pct: 5, ad_spend: 500 },
        repairs: [],
        message: '',
      },
    });
    expect(banner.kind).toBe('valid');
    expect(banner.violations).toEqual([]);
  });
});

describe('displayedValue', () => {
  it('equals profit_change when the slider is at zero', () => {
    expect(displayedValue(estimate, 0)).toBe(estimate.profit_change);
  });

  it('re-weights the returned deltas by the multiplier', () => {
    expect(displayedValue(estimate, 150000)).toBeCloseTo(1200 + -0.01 * 150000, 9);
    expect(displayedValue(estimate, 300000)).toBeCloseTo(1200 + -0.01 * 300000, 9);
  });
});

describe('forecastCard', () => {
  it('renders confidences in [0,1] as percentages', () => {
    const card = forecastCard(estimate, 150000);
    expect(card.profitConfidencePct).toBe(82);
    expect(card.trustConfidencePct).toBe(57);
  });

  it('carries the deltas through unchanged', () => {
    const card = forecastCard(estimate, 0);
    expect(card.profitChange).toBe(1200);
    expect(card.trustChange).toBe(-0.01);
    expect(card.displayedValue).toBe(1200);
  });
});

describe('statusLine and formatting', () => {
  it('formats the state snapshot', () => {
    const line = statusLine({
      week: 54,
      price: 123.456,
      trust: 0.7123,
      prev_ad_spend: 500,
      cumulative_profit: 1234567.89,
    });
    expect(line.week).toBe(54);
    expect(line.price).toBe('$123.46');
    expect(line.trust).toBe('0.712');
    expect(line.cumulativeProfit).toBe('$1,234,567.89');
    expect(line.seasonPhase).toBe(2);
  });

  it('season phase wraps a 52-week cycle', () => {
    expect(seasonPhase(0)).toBe(0);
    expect(seasonPhase(51)).toBe(51);
    expect(seasonPhase(52)).toBe(0);
    expect(seasonPhase(105)).toBe(1);
  });

  it('formats percentages with an explicit sign', () => {
    expect(formatPct(50)).toBe('+50.0%');
    expect(formatPct(-12.34)).toBe('-12.3%');
    expect(formatPct(0)).toBe('0.0%');
  });

  it('formats money with separators', () => {
    expect(formatMoney(1234.5)).toBe('$1,234.50');
    expect(formatMoney(-20)).toBe('$-20.00');
  });
});
