// Typed client for the shadow service. The editor talks to the backend
// exclusively through this module.

import { ElmDoc } from "./types.js";

export interface SessionInfo {
  id: string;
  status: string;
}

export interface SessionStatus {
  status: "building" | "ready" | "error";
  progress: number;
  error: string;
}

export interface ComposeResult {
  compose_ms: number;
  rasterize_ms: number;
  width: number;
  height: number;
  shadow_peak: number;
  shadow_png_b64: string;
  preview_png_b64?: string;
}

export interface Stroke {
  x: number;
  y: number;
  radius: number;
  value: number;
  mode?: "auto" | "darken" | "lighten";
}

export function bytesToB64(bytes: Uint8Array): string {
  if (typeof Buffer !== "undefined") return Buffer.from(bytes).toString("base64");
  let bin = "";
  bytes.forEach((b) => (bin += String.fromCharCode(b)));
  return btoa(bin);
}

export function b64ToBytes(b64: string): Uint8Array {
  if (typeof Buffer !== "undefined") return new Uint8Array(Buffer.from(b64, "base64"));
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function unwrap<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = (await res.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ShadowClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  private async json<T>(path: string, method: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(this.url(path), {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    return unwrap<T>(res);
  }

  createSessionFromMesh(objText: string, imageSize = 256, spp = 64): Promise<SessionInfo> {
    return this.json("/sessions", "POST", {
      mesh_obj_b64: bytesToB64(new TextEncoder().encode(objText)),
      image_size: [imageSize, imageSize],
      spp,
    });
  }

  createSessionFromBases(ssbb: Uint8Array): Promise<SessionInfo> {
    return this.json("/sessions", "POST", { bases_b64: bytesToB64(ssbb) });
  }

  status(id: string): Promise<SessionStatus> {
    return this.json(`/sessions/${id}/status`, "GET");
  }

  setElm(id: string, doc: ElmDoc): Promise<ComposeResult> {
    return this.json(`/sessions/${id}/elm`, "PUT", doc);
  }

  async shadowBytes(id: string, format: "pfm" | "png" = "pfm",
                    domain: "inverse" | "radiance" = "inverse"): Promise<Uint8Array> {
    const res = await this.fetchFn(
      this.url(`/sessions/${id}/shadow?format=${format}&domain=${domain}`),
    );
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return new Uint8Array(await res.arrayBuffer());
  }

  putStrokes(id: string, strokes: Stroke[]): Promise<{ ao_png_b64: string; applied: number }> {
    return this.json(`/sessions/${id}/ao/strokes`, "PUT", { strokes });
  }

  putBackground(id: string, png: Uint8Array): Promise<{ width: number; height: number }> {
    return this.json(`/sessions/${id}/background`, "PUT", { png_b64: bytesToB64(png) });
  }

  putCutout(id: string, png: Uint8Array, position: [number, number],
            scale: number): Promise<{ ok: boolean }> {
    return this.json(`/sessions/${id}/cutout`, "PUT", {
      png_b64: bytesToB64(png),
      position,
      scale,
    });
  }

  async compositeBytes(id: string): Promise<Uint8Array> {
    const res = await this.fetchFn(this.url(`/sessions/${id}/composite`));
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return new Uint8Array(await res.arrayBuffer());
  }

  async exportBytes(id: string): Promise<Uint8Array> {
    const res = await this.fetchFn(this.url(`/sessions/${id}/export`));
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return new Uint8Array(await res.arrayBuffer());
  }
}
