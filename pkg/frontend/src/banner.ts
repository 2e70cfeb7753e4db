/** Error banner: every service failure is surfaced here, never swallowed. */

export class ErrorBanner {
  readonly el: HTMLElement;
  private messageEl: HTMLElement;
  private retryBtn: HTMLButtonElement;
  private retryFn: (() => void) | null = null;

  constructor() {
    this.el = document.createElement("div");
    this.el.className = "error-banner";
    this.el.setAttribute("role", "alert");
    this.el.hidden = true;

    this.messageEl = document.createElement("span");
    this.messageEl.className = "error-message";
    this.retryBtn = document.createElement("button");
    this.retryBtn.textContent = "Retry";
    this.retryBtn.className = "error-retry";
    this.retryBtn.addEventListener("click", () => {
      this.hide();
      this.retryFn?.();
    });
    this.el.append(this.messageEl, this.retryBtn);
  }

  show(message: string, retry?: () => void): void {
    this.messageEl.textContent = message;
    this.retryFn = retry ?? null;
    this.retryBtn.hidden = retry === undefined;
    this.el.hidden = false;
  }

  hide(): void {
    this.el.hidden = true;
    this.messageEl.textContent = "";
  }

  get visibleMessage(): string | null {
    return this.el.hidden ? null : this.messageEl.textContent;
  }
}
