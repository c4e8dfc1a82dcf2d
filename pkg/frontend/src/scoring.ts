// Client-side mirror of the server's deduction rule. The server remains
// the source of truth: every submission is recomputed there and rejected
// on mismatch, so this must stay in exact agreement (see the parity test).

export type Bracket = 'accurate' | 'imprecise' | 'offtrack';

export interface ErrorCounts {
  hallucinations: number;
  omissions: number;
  consistency: number;
  confusions: number;
}

export const BRACKET_MAX: Record<Bracket, number> = {
  accurate: 10,
  imprecise: 6,
  offtrack: 1,
};

export const EMPTY_ERRORS: ErrorCounts = {
  hallucinations: 0,
  omissions: 0,
  consistency: 0,
  confusions: 0,
};

export function totalErrors(errors: ErrorCounts): number {
  return (
    errors.hallucinations + errors.omissions + errors.consistency + errors.confusions
  );
}

export function computeLmpScore(bracket: Bracket, errors: ErrorCounts): number {
  for (const value of Object.values(errors)) {
    if (value < 0 || !Number.isInteger(value)) {
      throw new Error('error counts must be non-negative integers');
    }
  }
  if (bracket === 'offtrack') return 1;
  return Math.max(1, BRACKET_MAX[bracket] - totalErrors(errors));
}
