// FNV-1a over bytes or strings; used to detect preview changes cheaply.

export function fnv1a(data: Uint8Array | string): number {
  const bytes =
    typeof data === "string" ? new TextEncoder().encode(data) : data;
  let hash = 0x811c9dc5;
  for (let i = 0; i < bytes.length; i++) {
    hash ^= bytes[i];
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}
