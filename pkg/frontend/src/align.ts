// Approximate source<->target alignment for the hover highlight: map the
// hovered character's relative position to a window around the same relative
// position on the other side. Purely proportional, no alignment model.

export function proportionalWindow(
  sourceLength: number,
  targetLength: number,
  sourceIndex: number,
  windowFraction = 0.12,
): [number, number] {
  if (sourceLength <= 0 || targetLength <= 0) return [0, 0];
  const fraction = Math.max(0, Math.min(sourceIndex / sourceLength, 1));
  const center = Math.round(fraction * (targetLength - 1));
  const half = Math.max(1, Math.round((windowFraction * targetLength) / 2));
  return [Math.max(0, center - half), Math.min(targetLength - 1, center + half)];
}
