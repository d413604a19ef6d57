export { Session } from "./session.js";
export type {
  ConvertResult,
  MetricsReport,
  SchemaHandle,
  SessionOptions,
  SoftDistribution,
} from "./session.js";
export { RpcError, SessionError } from "./errors.js";
