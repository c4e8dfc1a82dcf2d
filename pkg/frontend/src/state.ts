// Workbench state machine for the three-step annotation flow:
// step 1 simplicity level, step 2 characterization class, step 3
// bracket + error tallies. Submission stays disabled until every step
// is complete (and class 18 has a justification); the displayed score
// always equals the deduction rule applied to the current selections.

import {
  Bracket,
  EMPTY_ERRORS,
  ErrorCounts,
  computeLmpScore,
} from './scoring.js';

export const OTHERS_CLASS = 18;

export interface Selections {
  simplicity: string | null;
  characterization: number | null;
  bracket: Bracket | null;
  errors: ErrorCounts;
  comment: string;
}

export type BlockReason =
  | { kind: 'none' }
  | { kind: 'score-mismatch'; clientScore: number; serverScore: number }
  | { kind: 'conflict'; detail: string }
  | { kind: 'network'; detail: string };

export class WorkbenchState {
  selections: Selections = freshSelections();
  startedAt: number;
  block: BlockReason = { kind: 'none' };

  constructor(private now: () => number = Date.now) {
    this.startedAt = now();
  }

  selectSimplicity(level: string): void {
    this.selections.simplicity = level;
  }

  selectCharacterization(id: number): void {
    this.selections.characterization = id;
  }

  selectBracket(bracket: Bracket): void {
    this.selections.bracket = bracket;
  }

  setError(kind: keyof ErrorCounts, count: number): void {
    if (count < 0 || !Number.isInteger(count)) {
      throw new Error('error tallies are non-negative integers');
    }
    this.selections.errors = { ...this.selections.errors, [kind]: count };
  }

  setComment(text: string): void {
    this.selections.comment = text;
  }

  /** Live score for the scoring step; null until a bracket is chosen. */
  get displayedScore(): number | null {
    if (this.selections.bracket === null) return null;
    return computeLmpScore(this.selections.bracket, this.selections.errors);
  }

  get stepsComplete(): [boolean, boolean, boolean] {
    return [
      this.selections.simplicity !== null,
      this.selections.characterization !== null,
      this.selections.bracket !== null,
    ];
  }

  /** Class 18 ("Autres") is only valid with a written justification. */
  get needsJustification(): boolean {
    return (
      this.selections.characterization === OTHERS_CLASS &&
      this.selections.comment.trim() === ''
    );
  }

  get canSubmit(): boolean {
    return this.stepsComplete.every(Boolean) && !this.needsJustification;
  }

  get elapsedSeconds(): number {
    return Math.floor((this.now() - this.startedAt) / 1000);
  }

  /** Soft guidance only: the study asks for about 5 minutes per pair. */
  get overSoftLimit(): boolean {
    return this.elapsedSeconds > 300;
  }

  payload(annotatorId: string, instanceId: string) {
    if (!this.canSubmit) {
      throw new Error('submission requires all three steps (and class-18 justification)');
    }
    const comment = this.selections.comment.trim();
    return {
      annotator_id: annotatorId,
      instance_id: instanceId,
      simplicity: this.selections.simplicity as string,
      characterization: this.selections.characterization as number,
      bracket: this.selections.bracket as Bracket,
      errors: this.selections.errors,
      lmp_score: this.displayedScore as number,
      ...(comment === '' ? {} : { comment }),
      elapsed_seconds: this.elapsedSeconds,
    };
  }

  /** Fresh selections for the next instance; keeps nothing across pairs. */
  resetForNextInstance(): void {
    this.selections = freshSelections();
    this.block = { kind: 'none' };
    this.startedAt = this.now();
  }
}

function freshSelections(): Selections {
  return {
    simplicity: null,
    characterization: null,
    bracket: null,
    errors: { ...EMPTY_ERRORS },
    comment: '',
  };
}
