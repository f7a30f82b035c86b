/** DOM wiring: reads the form, drives the controller, assigns innerHTML. */

import { createClient, resolveServiceUrl } from "./api.js";
import { AppController, validateForm } from "./state.js";
import {
  renderError,
  renderLoading,
  renderPair,
  renderResults,
  renderStale,
} from "./render.js";
import { MAX_K, MIN_K } from "./types.js";

declare global {
  interface Window {
    NDV_SERVICE_URL?: string;
  }
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function startApp(): void {
  const serviceUrl = resolveServiceUrl(window, window.location.search);
  const controller = new AppController(createClient(serviceUrl));

  const textInput = byId<HTMLTextAreaElement>("query-text");
  const kInput = byId<HTMLInputElement>("query-k");
  const maskInput = byId<HTMLInputElement>("query-mask");
  const submitButton = byId<HTMLButtonElement>("submit-query");
  const formHint = byId<HTMLSpanElement>("form-hint");
  const main = byId<HTMLElement>("main-view");

  kInput.min = String(MIN_K);
  kInput.max = String(MAX_K);
  byId<HTMLSpanElement>("service-url").textContent = serviceUrl;

  function syncForm(): void {
    controller.form = {
      text: textInput.value,
      k: Number(kInput.value),
      mask: maskInput.checked,
    };
    const valid = validateForm(controller.form);
    submitButton.disabled = !valid.ok;
    formHint.textContent = valid.ok ? "" : valid.reason;
  }

  function renderView(): void {
    const view = controller.view;
    switch (view.kind) {
      case "idle":
        main.innerHTML = `<p class="empty">paste a modern article above to begin</p>`;
        return;
      case "loading":
        main.innerHTML = renderLoading();
        return;
      case "results":
        main.innerHTML = controller.lastResponse
          ? renderResults(controller.lastResponse)
          : "";
        return;
      case "pair":
        main.innerHTML = renderPair(
          controller.form.text,
          controller.lastResponse?.masked_query ?? "",
          view.showMasked,
          view.hit,
          view.article,
        );
        return;
      case "error":
        main.innerHTML = renderError(view.message, view.retryable);
        return;
      case "stale":
        main.innerHTML = renderStale(view.message);
        return;
    }
  }

  async function submit(): Promise<void> {
    syncForm();
    renderView();
    await controller.submit();
    renderView();
  }

  textInput.addEventListener("input", syncForm);
  kInput.addEventListener("input", syncForm);
  maskInput.addEventListener("change", syncForm);
  submitButton.addEventListener("click", (event) => {
    event.preventDefault();
    void submit();
  });

  // One delegated listener covers hit cards, pair controls, and banners.
  main.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const openId = target.closest<HTMLElement>(".open-pair")?.dataset.hitId;
    if (openId) {
      void controller.openPair(openId).then(renderView);
      return;
    }
    if (target.id === "toggle-mask") {
      controller.toggleMasked();
      renderView();
    } else if (target.id === "back-to-results") {
      controller.back();
      renderView();
    } else if (target.id === "retry-search" || target.id === "rerun-search") {
      void submit();
    }
  });

  syncForm();
  renderView();
}

startApp();
