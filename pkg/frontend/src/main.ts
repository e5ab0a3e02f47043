// DOM wiring for the light-painting editor. All service traffic goes through
// ShadowClient; compose requests are debounced latest-wins so dragging a
// light never queues stale work.

import { ShadowClient, ComposeResult, b64ToBytes } from "./api.js";
import { canvasToNormalized, pickLight, belowHorizon } from "./coords.js";
import { LatestWins } from "./debounce.js";
import { rasterizeMixture, toRgba } from "./elm-render.js";
import { EditorState } from "./state.js";
import { ELM_WIDTH, ELM_HEIGHT, ElmDoc } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

class Editor {
  private readonly client = new ShadowClient("");
  private readonly state = new EditorState();
  private sessionId: string | null = null;
  private dragging = false;
  private aoBrush = false;
  private cutoutPos: [number, number] = [40, 40];
  private cutoutScale = 1.0;
  private readonly composer: LatestWins<ElmDoc, ComposeResult>;

  private readonly elmCanvas = $("elm-canvas") as unknown as HTMLCanvasElement;
  private readonly previewImg = $("preview") as HTMLImageElement;
  private readonly statusLine = $("status-line");
  private readonly warnLine = $("warn-line");

  constructor() {
    this.composer = new LatestWins(
      (doc) => {
        if (!this.sessionId) return Promise.reject(new Error("no session"));
        return this.client.setElm(this.sessionId, doc);
      },
      (result) => this.showCompose(result),
      (err) => this.note(`compose failed: ${err}`),
    );
    this.wireSession();
    this.wireElmCanvas();
    this.wireCompositing();
    this.drawElm();
  }

  private note(text: string): void {
    this.statusLine.textContent = text;
  }

  private showCompose(result: ComposeResult): void {
    const src = result.preview_png_b64 ?? result.shadow_png_b64;
    this.previewImg.src = `data:image/png;base64,${src}`;
    this.note(`compose ${result.compose_ms.toFixed(2)} ms`);
  }

  private pushElm(): void {
    this.drawElm();
    if (this.sessionId) this.composer.submit(this.state.toDoc());
  }

  private drawElm(): void {
    const ctx = this.elmCanvas.getContext("2d");
    if (!ctx) return;
    const values = rasterizeMixture(this.state.toDoc(), ELM_WIDTH, ELM_HEIGHT);
    ctx.putImageData(new ImageData(toRgba(values), ELM_WIDTH, ELM_HEIGHT), 0, 0);
    // horizon: only lights above it cast shadows
    ctx.strokeStyle = "#d94";
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(0, ELM_HEIGHT / 2);
    ctx.lineTo(ELM_WIDTH, ELM_HEIGHT / 2);
    ctx.stroke();
    ctx.setLineDash([]);
    this.state.lights.forEach((light, i) => {
      ctx.strokeStyle = i === this.state.selected ? "#4cf" : "#fff";
      ctx.beginPath();
      ctx.arc(light.x * ELM_WIDTH, light.y * ELM_HEIGHT, 6, 0, 2 * Math.PI);
      ctx.stroke();
    });
  }

  private canvasPoint(ev: MouseEvent): { px: number; py: number } {
    const rect = this.elmCanvas.getBoundingClientRect();
    return {
      px: ((ev.clientX - rect.left) / rect.width) * ELM_WIDTH,
      py: ((ev.clientY - rect.top) / rect.height) * ELM_HEIGHT,
    };
  }

  private wireElmCanvas(): void {
    const size = { width: ELM_WIDTH, height: ELM_HEIGHT };
    this.elmCanvas.addEventListener("mousedown", (ev) => {
      const { px, py } = this.canvasPoint(ev);
      const hit = pickLight(px, py, this.state.lights, size);
      if (ev.button === 2 || ev.ctrlKey) {
        if (hit >= 0) {
          this.state.removeLight(hit);
          this.pushElm();
        }
        return;
      }
      if (hit >= 0) {
        this.state.selected = hit;
      } else {
        const { x, y } = canvasToNormalized(px, py, size);
        this.state.addLight(x, y);
        this.warnLine.textContent = belowHorizon(y)
          ? "light is below the horizon: it casts no shadow"
          : "";
      }
      this.dragging = true;
      this.pushElm();
    });
    this.elmCanvas.addEventListener("mousemove", (ev) => {
      if (!this.dragging || this.state.selected < 0) return;
      const { px, py } = this.canvasPoint(ev);
      const { x, y } = canvasToNormalized(px, py, size);
      this.state.moveLight(this.state.selected, x, y);
      this.warnLine.textContent = belowHorizon(y)
        ? "light is below the horizon: it casts no shadow"
        : "";
      this.pushElm();
    });
    window.addEventListener("mouseup", () => (this.dragging = false));
    this.elmCanvas.addEventListener("contextmenu", (ev) => ev.preventDefault());
    this.elmCanvas.addEventListener("wheel", (ev) => {
      if (this.state.selected < 0) return;
      ev.preventDefault();
      const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
      this.state.adjustLight(this.state.selected, factor, ev.shiftKey);
      this.pushElm();
    });
  }

  private wireSession(): void {
    const fileInput = $("mesh-file") as HTMLInputElement;
    fileInput.addEventListener("change", async () => {
      const file = fileInput.files?.[0];
      if (!file) return;
      const buf = new Uint8Array(await file.arrayBuffer());
      try {
        const info = file.name.endsWith(".ssbb")
          ? await this.client.createSessionFromBases(buf)
          : await this.client.createSessionFromMesh(new TextDecoder().decode(buf));
        this.sessionId = info.id;
        this.note(`session ${info.id}: ${info.status}`);
        await this.pollUntilReady(info.id);
      } catch (err) {
        this.note(`upload failed: ${err}`);
      }
    });
    $("export-btn").addEventListener("click", async () => {
      if (!this.sessionId) return;
      const bytes = await this.client.exportBytes(this.sessionId);
      const blob = new Blob([bytes.buffer as ArrayBuffer], { type: "application/zip" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = `session-${this.sessionId}.zip`;
      a.click();
      URL.revokeObjectURL(a.href);
    });
  }

  private async pollUntilReady(id: string): Promise<void> {
    for (;;) {
      const status = await this.client.status(id);
      if (status.status === "ready") {
        this.note("session ready");
        this.pushElm();
        return;
      }
      if (status.status === "error") {
        this.note(`build failed: ${status.error}`);
        return;
      }
      this.note(`building ${(status.progress * 100).toFixed(0)}%`);
      await new Promise((r) => setTimeout(r, 400));
    }
  }

  private wireCompositing(): void {
    const bgInput = $("background-file") as HTMLInputElement;
    bgInput.addEventListener("change", async () => {
      const file = bgInput.files?.[0];
      if (!file || !this.sessionId) return;
      await this.client.putBackground(this.sessionId, new Uint8Array(await file.arrayBuffer()));
      this.pushElm();
    });
    const cutInput = $("cutout-file") as HTMLInputElement;
    cutInput.addEventListener("change", async () => {
      const file = cutInput.files?.[0];
      if (!file || !this.sessionId) return;
      await this.client.putCutout(
        this.sessionId,
        new Uint8Array(await file.arrayBuffer()),
        this.cutoutPos,
        this.cutoutScale,
      );
      this.pushElm();
    });
    const scale = $("cutout-scale") as HTMLInputElement;
    scale.addEventListener("input", async () => {
      this.cutoutScale = parseFloat(scale.value);
      await this.replaceCutout();
    });
    this.previewImg.addEventListener("mousedown", (ev) => {
      if (!this.aoBrush) {
        // drag anchors the cutout's ground contact to the pointer
        const rect = this.previewImg.getBoundingClientRect();
        this.cutoutPos = [ev.clientX - rect.left, ev.clientY - rect.top];
        void this.replaceCutout();
      } else {
        void this.brushAt(ev);
      }
    });
    const brushToggle = $("ao-brush") as HTMLInputElement;
    brushToggle.addEventListener("change", () => (this.aoBrush = brushToggle.checked));
  }

  private async replaceCutout(): Promise<void> {
    const cutInput = $("cutout-file") as HTMLInputElement;
    const file = cutInput.files?.[0];
    if (!file || !this.sessionId) return;
    await this.client.putCutout(
      this.sessionId,
      new Uint8Array(await file.arrayBuffer()),
      this.cutoutPos,
      this.cutoutScale,
    );
    this.pushElm();
  }

  private async brushAt(ev: MouseEvent): Promise<void> {
    if (!this.sessionId) return;
    const rect = this.previewImg.getBoundingClientRect();
    const radius = parseFloat(($("brush-radius") as HTMLInputElement).value);
    const value = parseFloat(($("brush-value") as HTMLInputElement).value);
    const res = await this.client.putStrokes(this.sessionId, [
      {
        x: ev.clientX - rect.left,
        y: ev.clientY - rect.top,
        radius,
        value,
      },
    ]);
    const aoImg = $("ao-view") as HTMLImageElement;
    aoImg.src = `data:image/png;base64,${res.ao_png_b64}`;
  }
}

declare global {
  interface Window {
    editor: Editor;
  }
}

if (typeof document !== "undefined" && document.getElementById("elm-canvas")) {
  window.editor = new Editor();
}

export { Editor, b64ToBytes };
