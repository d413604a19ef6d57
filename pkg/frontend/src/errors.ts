/** Error raised when the engine rejects a request.
 *
 * `coreName` carries the engine-side error class (for example
 * `DomainError` or `ValidationError`), so callers can branch on the
 * failure kind without parsing messages.
 */
export class RpcError extends Error {
  readonly coreName: string;

  constructor(coreName: string, message: string) {
    super(`${coreName}: ${message}`);
    this.name = "RpcError";
    this.coreName = coreName;
  }
}

/** Transport-level failure: the engine process died or misbehaved. */
export class SessionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SessionError";
  }
}
