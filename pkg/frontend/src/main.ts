// Entry point: wires the workbench state machine to the DOM. The page
// shows the pair side by side, the three annotation steps, a live score,
// progress, and a soft timer against the 5-minute guidance.

import { ApiClient, ApiError, Instance, Labels } from './api.js';
import { ErrorCounts } from './scoring.js';
import { WorkbenchState } from './state.js';

const ERROR_KINDS: (keyof ErrorCounts)[] = [
  'hallucinations',
  'omissions',
  'consistency',
  'confusions',
];

const ERROR_LABELS: Record<keyof ErrorCounts, string> = {
  hallucinations: 'Hallucinations',
  omissions: 'Omissions',
  consistency: 'Incohérences',
  confusions: 'Confusions',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

export class Workbench {
  state = new WorkbenchState();
  instance: Instance | null = null;
  private timerHandle: number | null = null;

  constructor(
    private api: ApiClient,
    private annotator: string,
    private labels: Labels,
    private root: HTMLElement,
  ) {}

  async loadNext(): Promise<void> {
    const next = await this.api.next(this.annotator);
    if (next.done) {
      this.renderDone(next.progress.total);
      return;
    }
    this.instance = next.instance!;
    this.state.resetForNextInstance();
    this.render(next.progress.completed, next.progress.total);
  }

  async submit(): Promise<void> {
    if (!this.instance || !this.state.canSubmit) return;
    const payload = this.state.payload(this.annotator, this.instance.id);
    try {
      // The server recomputes the score; asking first gives the annotator
      // an explanation instead of a bare rejection if the mirror drifts.
      const serverScore = await this.api.serverScore(payload.bracket, payload.errors);
      if (serverScore !== payload.lmp_score) {
        this.state.block = {
          kind: 'score-mismatch',
          clientScore: payload.lmp_score,
          serverScore,
        };
        this.renderBanner();
        return;
      }
      await this.api.submit(payload);
      await this.loadNext();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.state.block = { kind: 'conflict', detail: error.detail };
      } else {
        const detail = error instanceof Error ? error.message : String(error);
        this.state.block = { kind: 'network', detail };
      }
      // Selections are preserved; the annotator can retry.
      this.renderBanner();
    }
  }

  private render(completed: number, total: number): void {
    this.root.replaceChildren();
    const instance = this.instance!;

    const header = el('header');
    header.append(
      el('span', { id: 'progress' }, `Progression : ${completed}/${total}`),
      el('span', { id: 'timer' }, 'Temps : 0 s'),
    );
    this.root.append(header);

    const pair = el('section', { id: 'pair' });
    const source = el('article', { class: 'text source' });
    source.append(el('h2', {}, 'Texte original'), el('p', {}, instance.source_text));
    const simplified = el('article', { class: 'text simplified' });
    simplified.append(el('h2', {}, 'Texte simplifié'), el('p', {}, instance.simplified_text));
    pair.append(source, simplified);
    this.root.append(pair);

    this.root.append(this.renderSimplicityStep());
    this.root.append(this.renderCharacterizationStep());
    this.root.append(this.renderScoringStep());

    const banner = el('div', { id: 'banner', hidden: '' });
    this.root.append(banner);

    const submit = el('button', { id: 'submit', disabled: '' }, 'Soumettre');
    submit.addEventListener('click', () => void this.submit());
    this.root.append(submit);

    this.startTimer();
    this.refreshControls();
  }

  private renderSimplicityStep(): HTMLElement {
    const section = el('section', { class: 'step', id: 'step-simplicity' });
    section.append(el('h3', {}, 'Étape 1 — Niveau de simplicité'));
    for (const level of this.labels.simplicity) {
      const button = el(
        'button',
        { class: 'choice', 'data-simplicity': level },
        level.replace(/_/g, ' '),
      );
      button.addEventListener('click', () => {
        this.state.selectSimplicity(level);
        this.refreshControls();
      });
      section.append(button);
    }
    return section;
  }

  private renderCharacterizationStep(): HTMLElement {
    const section = el('section', { class: 'step', id: 'step-characterization' });
    section.append(el('h3', {}, 'Étape 2 — Caractérisation'));
    for (const option of this.labels.characterization) {
      // French label shown, English translation as tooltip.
      const button = el(
        'button',
        { class: 'choice', 'data-class': String(option.id), title: option.en },
        `${option.id}. ${option.fr}`,
      );
      button.addEventListener('click', () => {
        this.state.selectCharacterization(option.id);
        this.refreshControls();
      });
      section.append(button);
    }
    const comment = el('textarea', {
      id: 'comment',
      placeholder: 'Commentaire (obligatoire pour la classe 18 « Autres »)',
    });
    comment.addEventListener('input', () => {
      this.state.setComment(comment.value);
      this.refreshControls();
    });
    section.append(comment);
    return section;
  }

  private renderScoringStep(): HTMLElement {
    const section = el('section', { class: 'step', id: 'step-scoring' });
    section.append(el('h3', {}, 'Étape 3 — Préservation du sens juridique'));
    for (const bracket of this.labels.brackets) {
      const button = el(
        'button',
        { class: 'choice', 'data-bracket': bracket.id },
        `${bracket.id} (max ${bracket.max_score})`,
      );
      button.addEventListener('click', () => {
        this.state.selectBracket(bracket.id);
        this.refreshControls();
      });
      section.append(button);
    }
    for (const kind of ERROR_KINDS) {
      const row = el('label', { class: 'tally' }, `${ERROR_LABELS[kind]} : `);
      const input = el('input', {
        type: 'number',
        min: '0',
        step: '1',
        value: '0',
        'data-error': kind,
      });
      input.addEventListener('input', () => {
        const count = Math.max(0, Math.floor(Number(input.value) || 0));
        input.value = String(count);
        this.state.setError(kind, count);
        this.refreshControls();
      });
      row.append(input);
      section.append(row);
    }
    section.append(el('output', { id: 'score' }, 'Score : —'));
    return section;
  }

  private refreshControls(): void {
    const score = this.root.querySelector<HTMLOutputElement>('#score');
    if (score) {
      const value = this.state.displayedScore;
      score.textContent = value === null ? 'Score : —' : `Score : ${value}/10`;
    }
    for (const button of this.root.querySelectorAll<HTMLButtonElement>('.choice')) {
      const { simplicity, class: cls, bracket } = (button as HTMLButtonElement).dataset;
      const selected =
        (simplicity !== undefined && simplicity === this.state.selections.simplicity) ||
        (cls !== undefined && Number(cls) === this.state.selections.characterization) ||
        (bracket !== undefined && bracket === this.state.selections.bracket);
      button.classList.toggle('selected', selected);
    }
    const submit = this.root.querySelector<HTMLButtonElement>('#submit');
    if (submit) submit.disabled = !this.state.canSubmit;
  }

  private renderBanner(): void {
    const banner = this.root.querySelector<HTMLElement>('#banner');
    if (!banner) return;
    const block = this.state.block;
    banner.hidden = block.kind === 'none';
    if (block.kind === 'score-mismatch') {
      banner.textContent =
        `Score refusé : le client affiche ${block.clientScore}, ` +
        `le serveur calcule ${block.serverScore}.`;
    } else if (block.kind === 'conflict') {
      banner.textContent = `Déjà soumis : ${block.detail}`;
    } else if (block.kind === 'network') {
      banner.textContent = `Erreur réseau, réessayez : ${block.detail}`;
    }
  }

  private renderDone(total: number): void {
    this.stopTimer();
    this.root.replaceChildren();
    const done = el('section', { id: 'done' });
    done.append(
      el('h2', {}, 'Terminé !'),
      el('p', {}, `Les ${total} paires qui vous étaient assignées sont annotées. Merci.`),
    );
    this.root.append(done);
  }

  private startTimer(): void {
    this.stopTimer();
    this.timerHandle = window.setInterval(() => {
      const timer = this.root.querySelector<HTMLElement>('#timer');
      if (!timer) return;
      const seconds = this.state.elapsedSeconds;
      timer.textContent = `Temps : ${seconds} s`;
      // Guidance only; nothing is blocked after five minutes.
      timer.classList.toggle('over-limit', this.state.overSoftLimit);
    }, 1000);
  }

  private stopTimer(): void {
    if (this.timerHandle !== null) window.clearInterval(this.timerHandle);
    this.timerHandle = null;
  }
}

export async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const annotator = params.get('annotator');
  const base = params.get('api') ?? '';
  const root = document.getElementById('app')!;
  if (!annotator) {
    root.textContent = 'Ajoutez ?annotator=<votre identifiant> à l’URL.';
    return;
  }
  const api = new ApiClient(base);
  const labels = await api.labels();
  const workbench = new Workbench(api, annotator, labels, root);
  await workbench.loadNext();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  void start();
}
