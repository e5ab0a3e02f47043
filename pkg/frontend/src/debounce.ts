// Latest-wins scheduler: at most one request in flight; while busy, only the
// most recent payload is remembered and dispatched next.

export class LatestWins<T, R> {
  private inflight = false;
  private pending: T | null = null;

  constructor(
    private readonly send: (payload: T) => Promise<R>,
    private readonly onResult: (result: R) => void,
    private readonly onError: (err: unknown) => void = () => {},
  ) {}

  submit(payload: T): void {
    if (this.inflight) {
      this.pending = payload; // overwrite: older pending edits are stale
      return;
    }
    this.dispatch(payload);
  }

  get busy(): boolean {
    return this.inflight;
  }

  private dispatch(payload: T): void {
    this.inflight = true;
    this.send(payload)
      .then((result) => this.onResult(result))
      .catch((err) => this.onError(err))
      .finally(() => {
        this.inflight = false;
        if (this.pending !== null) {
          const next = this.pending;
          this.pending = null;
          this.dispatch(next);
        }
      });
  }
}
