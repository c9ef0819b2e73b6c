/** Non-blocking toast notifications.
 *
 * Server diagnostics surface here; nothing is modal and nothing steals
 * focus.  Click a toast to dismiss it early.
 */

export type ToastKind = "error" | "info";

const LIFETIME_MS = 6000;

export function showToast(
  container: HTMLElement,
  message: string,
  kind: ToastKind = "error",
): HTMLElement {
  const toast = document.createElement("div");
  toast.className = `toast toast-${kind}`;
  toast.textContent = message;
  toast.title = "click to dismiss";
  const remove = () => {
    if (toast.parentElement) toast.parentElement.removeChild(toast);
  };
  toast.addEventListener("click", remove);
  container.appendChild(toast);
  setTimeout(remove, LIFETIME_MS);
  return toast;
}
