// Small formatting helpers shared by timeline and live panel.

export function fmtClock(ms: number): string {
  const total = Math.floor(ms / 1000);
  const h = Math.floor(total / 3600);
  const m = Math.floor((total % 3600) / 60);
  const s = total % 60;
  const mm = String(m).padStart(2, "0");
  const ss = String(s).padStart(2, "0");
  return h > 0 ? `${h}:${mm}:${ss}` : `${m}:${ss}`;
}

export function fmtCountdown(revealAt: number, now: number): string {
  const left = revealAt - now;
  if (left <= 0) return "revealed";
  const hours = Math.floor(left / 3_600_000);
  const minutes = Math.floor((left % 3_600_000) / 60_000);
  if (hours > 0) return `reveals in ${hours}h ${minutes}m`;
  const seconds = Math.floor((left % 60_000) / 1000);
  return `reveals in ${minutes}m ${seconds}s`;
}

export function fmtBpm(value: number | null): string {
  return value === null ? "--" : value.toFixed(0);
}

export function fmtRmssd(value: number | null): string {
  return value === null ? "--" : value.toFixed(1);
}
