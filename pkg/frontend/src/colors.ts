// Fixed color scheme: expert green, user blue, error joints pink,
// guidance purple.

export const COLORS = {
  expert: "#2ecc71",
  user: "#3b82f6",
  error: "#ff4fa3",
  guidance: "#9b59b6",
  background: "#10131a",
  grid: "#2a2f3a",
} as const;

export const SPEED_STEPS = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0] as const;

export function speedDown(current: number): number {
  const i = SPEED_STEPS.indexOf(current as (typeof SPEED_STEPS)[number]);
  if (i <= 0) return SPEED_STEPS[0];
  return SPEED_STEPS[i - 1];
}

export function speedUp(current: number): number {
  const i = SPEED_STEPS.indexOf(current as (typeof SPEED_STEPS)[number]);
  if (i === -1 || i === SPEED_STEPS.length - 1) {
    return SPEED_STEPS[SPEED_STEPS.length - 1];
  }
  return SPEED_STEPS[i + 1];
}
