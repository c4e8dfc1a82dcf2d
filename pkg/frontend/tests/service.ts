// Spawns the real Python annotation service over a small fixture dataset
// for parity and end-to-end tests. The service owns the scoring rule;
// these tests exist to prove the TypeScript side never disagrees with it.

import { ChildProcess, spawn } from 'node:child_process';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export interface LiveService {
  baseUrl: string;
  stop: () => void;
}

const FIXTURE_ROWS = [
  {
    id: 'fx1',
    source_text: "La prime est payable d'avance au début de chaque période d'assurance.",
    simplified_text: 'Vous payez la prime au début de chaque période.',
  },
  {
    id: 'fx2',
    source_text: "L'assureur peut résilier le contrat en cas de fausse déclaration.",
    simplified_text: 'Une fausse déclaration permet de mettre fin au contrat.',
  },
  {
    id: 'fx3',
    source_text: 'Les dommages résultant de la guerre sont exclus de la garantie.',
    simplified_text: 'La garantie ne couvre pas les dommages de guerre.',
  },
];

async function waitForReady(baseUrl: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30_000;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`service exited early with code ${child.exitCode}`);
    }
    try {
      const response = await fetch(`${baseUrl}/api/labels`);
      if (response.ok) return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error(`service never became ready: ${lastError}`);
}

export async function startService(
  annotators = 'alice,bob',
  seed = 42,
): Promise<LiveService> {
  const dir = mkdtempSync(join(tmpdir(), 'annotation-service-'));
  const dataset = join(dir, 'fixture.jsonl');
  writeFileSync(
    dataset,
    FIXTURE_ROWS.map((row) => JSON.stringify(row)).join('\n') + '\n',
    'utf-8',
  );
  const port = 18100 + Math.floor(Math.random() * 20_000);
  const child = spawn(
    'python3',
    [
      '-m', 'lmpkit.cli', 'serve',
      '--data', dataset,
      '--annotators', annotators,
      '--log', join(dir, 'events.jsonl'),
      '--seed', String(seed),
      '--port', String(port),
    ],
    { stdio: ['ignore', 'pipe', 'pipe'] },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  await waitForReady(baseUrl, child);
  return {
    baseUrl,
    stop: () => {
      child.kill('SIGTERM');
    },
  };
}
