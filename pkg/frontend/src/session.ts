/** Client for the engine's line-delimited JSON-RPC stdio interface.
 *
 * One engine subprocess per session; requests are matched to replies
 * by id, so callers may issue them concurrently.  Floats cross the
 * pipe as JSON numbers serialized through repr, which round-trips
 * float64 exactly.
 */
import { type ChildProcessWithoutNullStreams, spawn } from "node:child_process";
import { createInterface, type Interface } from "node:readline";

import { RpcError, SessionError } from "./errors.js";

export interface SessionOptions {
  /** Interpreter used to launch the engine; defaults to python3. */
  pythonPath?: string;
  /** Override the full argv after the interpreter. */
  args?: string[];
}

export interface SchemaHandle {
  handle: number;
  schema: string;
  relations: string[];
  vague: string;
}

export interface SoftDistribution {
  semantics: string;
  /** Relation name -> score, in schema order with the vague label last. */
  values: Record<string, number>;
  /** Relation name -> d(score)/d(probs), 8 entries per relation. */
  jacobian: Record<string, number[]>;
}

export interface ConvertResult {
  relation: string;
  ambiguous: boolean;
  satisfied: string[];
}

export interface MetricsReport {
  schema: string;
  total: number;
  micro: { precision: number; recall: number; f1: number };
  macro_f1: number;
  per_relation: Record<string, { precision: number; recall: number; f1: number }>;
  confusion: Record<string, Record<string, number>>;
  vague_errors: { to_vague: number; not_vague: number };
}

interface Pending {
  resolve: (value: unknown) => void;
  reject: (err: Error) => void;
}

export class Session {
  private proc: ChildProcessWithoutNullStreams;
  private reader: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;

  private constructor(proc: ChildProcessWithoutNullStreams) {
    this.proc = proc;
    this.reader = createInterface({ input: proc.stdout });
    this.reader.on("line", (line) => this.onLine(line));
    this.proc.on("exit", (code) => this.onExit(code));
    this.proc.stdin.on("error", () => {
      /* surfaced through pending rejections on exit */
    });
  }

  /** Launch the engine and verify it answers. */
  static async start(options: SessionOptions = {}): Promise<Session> {
    const python = options.pythonPath ?? process.env.POINTREL_PYTHON ?? "python3";
    const args = options.args ?? ["-m", "pointrel.cli", "rpc"];
    const proc = spawn(python, args, { stdio: ["pipe", "pipe", "pipe"] });
    const session = new Session(proc);
    await session.call("ping", {});
    return session;
  }

  private onLine(line: string): void {
    const text = line.trim();
    if (!text) return;
    let reply: { id?: number; result?: unknown; error?: { name: string; message: string } };
    try {
      reply = JSON.parse(text);
    } catch {
      return; // stray non-protocol output; replies are matched by id
    }
    const entry = reply.id === undefined ? undefined : this.pending.get(reply.id);
    if (!entry) return;
    this.pending.delete(reply.id as number);
    if (reply.error) {
      entry.reject(new RpcError(reply.error.name, reply.error.message));
    } else {
      entry.resolve(reply.result);
    }
  }

  private onExit(code: number | null): void {
    const err = new SessionError(`engine exited with code ${code}`);
    for (const entry of this.pending.values()) entry.reject(err);
    this.pending.clear();
  }

  private call(method: string, params: Record<string, unknown>): Promise<unknown> {
    if (this.closed) {
      return Promise.reject(new SessionError("session is closed"));
    }
    const id = this.nextId++;
    const payload = JSON.stringify({ id, method, params }) + "\n";
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.proc.stdin.write(payload, (err) => {
        if (err) {
          this.pending.delete(id);
          reject(new SessionError(`write failed: ${err.message}`));
        }
      });
    });
  }

  /** Compile and validate a schema by built-in name or source text. */
  async createHandle(spec: { schema: string } | { text: string }): Promise<SchemaHandle> {
    return (await this.call("create_handle", spec)) as SchemaHandle;
  }

  /** Score every relation at the given question probabilities. */
  async softDistribution(
    handle: SchemaHandle | number,
    probs: number[],
    semantics: "product" | "prob_sum" = "product",
  ): Promise<SoftDistribution> {
    return (await this.call("soft_distribution", {
      handle: typeof handle === "number" ? handle : handle.handle,
      probs,
      semantics,
    })) as SoftDistribution;
  }

  /** Decode eight boolean answers to a relation name. */
  async convert(handle: SchemaHandle | number, answers: boolean[]): Promise<ConvertResult> {
    return (await this.call("convert", {
      handle: typeof handle === "number" ? handle : handle.handle,
      answers,
    })) as ConvertResult;
  }

  /** Combine four ordering answers into an interval relation. */
  async aggregate(start: [string, string], end: [string, string]): Promise<string> {
    const res = (await this.call("aggregate", { start, end })) as { relation: string };
    return res.relation;
  }

  /** Full evaluation report for paired gold/predicted labels. */
  async metrics(
    handle: SchemaHandle | number,
    gold: string[],
    pred: string[],
  ): Promise<MetricsReport> {
    return (await this.call("metrics", {
      handle: typeof handle === "number" ? handle : handle.handle,
      gold,
      pred,
    })) as MetricsReport;
  }

  async ping(): Promise<void> {
    await this.call("ping", {});
  }

  /** Ask the engine to exit and wait for it. */
  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    const done = new Promise<void>((resolve) => {
      this.proc.once("exit", () => resolve());
    });
    try {
      this.proc.stdin.write(JSON.stringify({ id: 0, method: "shutdown" }) + "\n");
      this.proc.stdin.end();
    } catch {
      this.proc.kill();
    }
    await done;
    this.reader.close();
  }
}
