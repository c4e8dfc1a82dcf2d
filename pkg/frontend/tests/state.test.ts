import { describe, expect, it } from 'vitest';

import { computeLmpScore } from '../src/scoring';
import { WorkbenchState } from '../src/state';

function completed(state: WorkbenchState): WorkbenchState {
  state.selectSimplicity('easier_to_read');
  state.selectCharacterization(3);
  state.selectBracket('accurate');
  return state;
}

describe('computeLmpScore', () => {
  it('mirrors the deduction rule examples', () => {
    const zero = { hallucinations: 0, omissions: 0, consistency: 0, confusions: 0 };
    expect(computeLmpScore('accurate', zero)).toBe(10);
    expect(computeLmpScore('accurate', { ...zero, omissions: 2 })).toBe(8);
    expect(computeLmpScore('imprecise', { ...zero, hallucinations: 9 })).toBe(1);
    expect(computeLmpScore('offtrack', { ...zero, confusions: 7 })).toBe(1);
  });

  it('rejects invalid tallies', () => {
    const zero = { hallucinations: 0, omissions: 0, consistency: 0, confusions: 0 };
    expect(() => computeLmpScore('accurate', { ...zero, omissions: -1 })).toThrow();
    expect(() => computeLmpScore('accurate', { ...zero, omissions: 1.5 })).toThrow();
  });
});

describe('WorkbenchState', () => {
  it('blocks submission until all three steps are complete', () => {
    const state = new WorkbenchState();
    expect(state.canSubmit).toBe(false);
    state.selectSimplicity('easier_to_read');
    expect(state.canSubmit).toBe(false);
    state.selectCharacterization(3);
    expect(state.canSubmit).toBe(false);
    state.selectBracket('accurate');
    expect(state.canSubmit).toBe(true);
  });

  it('shows no score before a bracket is chosen, then tracks tallies', () => {
    const state = new WorkbenchState();
    expect(state.displayedScore).toBeNull();
    state.selectBracket('accurate');
    expect(state.displayedScore).toBe(10);
    state.setError('omissions', 3);
    expect(state.displayedScore).toBe(7);
    state.setError('hallucinations', 12);
    expect(state.displayedScore).toBe(1); // floor
  });

  it('locks the display at 1 for off-track regardless of tallies', () => {
    const state = new WorkbenchState();
    state.selectBracket('offtrack');
    expect(state.displayedScore).toBe(1);
    state.setError('confusions', 5);
    expect(state.displayedScore).toBe(1);
  });

  it('requires a justification for class 18', () => {
    const state = completed(new WorkbenchState());
    state.selectCharacterization(18);
    expect(state.canSubmit).toBe(false);
    state.setComment('   ');
    expect(state.canSubmit).toBe(false);
    state.setComment('reformulation hors catalogue');
    expect(state.canSubmit).toBe(true);
  });

  it('builds a payload whose score matches the displayed score', () => {
    const state = completed(new WorkbenchState());
    state.setError('consistency', 2);
    const payload = state.payload('alice', 'fx1');
    expect(payload.lmp_score).toBe(state.displayedScore);
    expect(payload.errors.consistency).toBe(2);
    expect(payload).not.toHaveProperty('comment');
  });

  it('refuses to build a payload when incomplete', () => {
    const state = new WorkbenchState();
    expect(() => state.payload('alice', 'fx1')).toThrow(/three steps/);
  });

  it('resets everything between instances', () => {
    const state = completed(new WorkbenchState());
    state.setError('omissions', 4);
    state.setComment('note');
    state.resetForNextInstance();
    expect(state.canSubmit).toBe(false);
    expect(state.displayedScore).toBeNull();
    expect(state.selections.errors.omissions).toBe(0);
    expect(state.selections.comment).toBe('');
  });

  it('reports the soft five-minute limit without blocking', () => {
    let clock = 0;
    const state = completed(new WorkbenchState(() => clock));
    expect(state.overSoftLimit).toBe(false);
    clock = 301_000;
    expect(state.overSoftLimit).toBe(true);
    expect(state.canSubmit).toBe(true);
    expect(state.payload('alice', 'fx1').elapsed_seconds).toBe(301);
  });
});
