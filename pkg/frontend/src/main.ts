/**
 * Cockpit wiring: one live session, compose-and-preview with debounced
 * validate/estimate calls, commit-and-advance, and four trajectory
 * charts. The session id is the only thing persisted client-side.
 */

import { ApiClient, ApiError } from './api.js';
import { renderChart } from './charts.js';
import { debounce } from './debounce.js';
import type { ActionDraft, EstimateResponse, MarketStatePayload } from './types.js';
import {
  forecastCard,
  formatMoney,
  formatPct,
  repairBanner,
  statusLine,
  trajectorySeries,
} from './viewmodel.js';

const SESSION_KEY = 'agora-session-id';
const PREVIEW_DEBOUNCE_MS = 250;

const baseUrl =
  new URLSearchParams(window.location.search).get('api') ?? 'http://127.0.0.1:8000';
const api = new ApiClient(baseUrl);

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let sessionId = '';
let currentState: MarketStatePayload | null = null;
let latestEstimate: EstimateResponse | null = null;

function draft(): ActionDraft {
  return {
    price_change_pct: Number(($('price-input') as HTMLInputElement).value) || 0,
    ad_spend: Number(($('ad-input') as HTMLInputElement).value) || 0,
  };
}

function multiplier(): number {
  return Number(($('multiplier-slider') as HTMLInputElement).value);
}

function showError(message: string): void {
  const box = $('error-box');
  box.textContent = message;
  box.classList.remove('hidden');
}

function clearError(): void {
  $('error-box').classList.add('hidden');
}

function renderState(state: MarketStatePayload): void {
  currentState = state;
  const line = statusLine(state);
  $('week-counter').textContent = `Week ${line.week}`;
  $('price-now').textContent = line.price;
  $('trust-now').textContent = line.trust;
  $('cumulative-now').textContent = line.cumulativeProfit;
  $('season-phase').textContent = `season phase ${line.seasonPhase}/52`;
}

function renderForecast(): void {
  const card = $('forecast-card');
  if (!latestEstimate) {
    card.classList.add('hidden');
    return;
  }
  const view = forecastCard(latestEstimate, multiplier());
  card.classList.remove('hidden');
  $('forecast-profit').textContent = formatMoney(view.profitChange);
  $('forecast-trust').textContent = view.trustChange.toFixed(4);
  $('forecast-profit-conf').textContent = `${view.profitConfidencePct}%`;
  $('forecast-trust-conf').textContent = `${view.trustConfidencePct}%`;
  $('forecast-value').textContent = formatMoney(view.displayedValue);
  $('multiplier-label').textContent = formatMoney(multiplier());
}

async function refreshCharts(): Promise<void> {
  const history = await api.history(sessionId);
  const series = trajectorySeries(history.weeks);
  renderChart($('chart-cumulative'), 'Cumulative profit', series.weeks, series.cumulativeProfit);
  renderChart($('chart-profit'), 'Weekly profit', series.weeks, series.weeklyProfit);
  renderChart($('chart-trust'), 'Brand trust', series.weeks, series.trust);
  renderChart($('chart-price'), 'Price', series.weeks, series.price);

  const metrics = await api.metrics(sessionId);
  $('metrics-line').textContent = metrics.metrics
    ? `sharpe ${metrics.metrics.sharpe.toFixed(2)} · ` +
      `failure ${metrics.metrics.failure_rate_pct.toFixed(1)}% · ` +
      `violations ${metrics.metrics.violation_rate_pct.toFixed(1)}%`
    : 'no completed weeks yet';
}

async function preview(): Promise<void> {
  clearError();
  try {
    const [validated, estimate] = await Promise.all([
      api.validate(sessionId, draft()),
      api.estimate(sessionId, draft()).catch((err: unknown) => {
        if (err instanceof ApiError && err.code === 'engine_missing') return null;
        throw err;
      }),
    ]);
    const banner = repairBanner(validated);
    const el = $('verdict-banner');
    el.textContent = banner.text;
    el.className = `banner ${banner.kind}`;
    $('violation-list').innerHTML = banner.violations
      .map((v) => `<li>${v}</li>`)
      .join('');
    latestEstimate = estimate;
    renderForecast();
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
}

async function commit(): Promise<void> {
  if (!currentState) return;
  clearError();
  try {
    const result = await api.act(sessionId, draft(), currentState.week);
    if (result.repairs.length > 0) {
      $('last-commit').textContent =
        `executed ${formatPct(result.executed_action.price_change_pct)} ` +
        `after repairs: ${result.repairs.join(', ')}`;
    } else {
      $('last-commit').textContent =
        `executed ${formatPct(result.executed_action.price_change_pct)} as drafted`;
    }
    renderState(result.state);
    await refreshCharts();
    await preview();
  } catch (err) {
    if (err instanceof ApiError && err.code === 'week_already_played') {
      showError('Week already played — state refreshed.');
      await resume();
      return;
    }
    showError(err instanceof Error ? err.message : String(err));
  }
}

async function resume(): Promise<void> {
  const history = await api.history(sessionId);
  const weeks = history.weeks;
  if (weeks.length > 0) {
    const last = weeks[weeks.length - 1];
    renderState({
      week: last.week + 1,
      price: last.price_after,
      trust: last.trust_after,
      prev_ad_spend: last.executed_action.ad_spend,
      cumulative_profit: last.cumulative_profit,
    });
  }
  await refreshCharts();
}

async function start(): Promise<void> {
  const saved = window.localStorage.getItem(SESSION_KEY);
  if (saved) {
    sessionId = saved;
    try {
      await resume();
      await preview();
      return;
    } catch {
      window.localStorage.removeItem(SESSION_KEY);
    }
  }
  const created = await api.createSession();
  sessionId = created.session_id;
  window.localStorage.setItem(SESSION_KEY, sessionId);
  renderState(created.state);
  await refreshCharts();
  await preview();
}

const debouncedPreview = debounce(() => void preview(), PREVIEW_DEBOUNCE_MS);

$('price-input').addEventListener('input', debouncedPreview);
$('ad-input').addEventListener('input', debouncedPreview);
$('multiplier-slider').addEventListener('input', renderForecast);
$('commit-button').addEventListener('click', () => void commit());
$('new-session-button').addEventListener('click', () => {
  window.localStorage.removeItem(SESSION_KEY);
  window.location.reload();
});

void start().catch((err) => showError(err instanceof Error ? err.message : String(err)));
