import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { Bracket, ErrorCounts, computeLmpScore } from '../src/scoring';
import { LiveService, startService } from './service';

// Deterministic PRNG so a parity failure is reproducible from the log.
function mulberry32(seed: number): () => number {
  let state = seed;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const BRACKETS: Bracket[] = ['accurate', 'imprecise', 'offtrack'];

let service: LiveService;
let api: ApiClient;

beforeAll(async () => {
  service = await startService();
  api = new ApiClient(service.baseUrl);
}, 60_000);

afterAll(() => {
  service.stop();
});

describe('client/server score parity', () => {
  it('agrees with the server on 500 random (bracket, tallies) cases', async () => {
    const rand = mulberry32(42);
    const cases: { bracket: Bracket; errors: ErrorCounts }[] = [];
    for (let i = 0; i < 500; i++) {
      cases.push({
        bracket: BRACKETS[Math.floor(rand() * BRACKETS.length)],
        errors: {
          hallucinations: Math.floor(rand() * 6),
          omissions: Math.floor(rand() * 6),
          consistency: Math.floor(rand() * 6),
          confusions: Math.floor(rand() * 6),
        },
      });
    }
    for (const { bracket, errors } of cases) {
      const clientScore = computeLmpScore(bracket, errors);
      const serverScore = await api.serverScore(bracket, errors);
      expect(serverScore, `${bracket} ${JSON.stringify(errors)}`).toBe(clientScore);
    }
  }, 120_000);
});
