/**
 * Canonical JSON identical to what the server stores: object keys sorted,
 * two-space indent, trailing newline. Lets tests assert byte-level
 * round-trips without a server.
 */
export function canonicalJson(value: unknown): string {
  return render(value, "") + "\n";
}

function render(value: unknown, indent: string): string {
  if (value === null || typeof value === "boolean") return JSON.stringify(value);
  if (typeof value === "number") return formatNumber(value);
  if (typeof value === "string") return JSON.stringify(value);
  const inner = indent + "  ";
  if (Array.isArray(value)) {
    if (value.length === 0) return "[]";
    const items = value.map((item) => inner + render(item, inner));
    return "[\n" + items.join(",\n") + "\n" + indent + "]";
  }
  if (typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>).sort(([a], [b]) =>
      a < b ? -1 : a > b ? 1 : 0,
    );
    if (entries.length === 0) return "{}";
    const items = entries.map(
      ([key, item]) => inner + JSON.stringify(key) + ": " + render(item, inner),
    );
    return "{\n" + items.join(",\n") + "\n" + indent + "}";
  }
  throw new Error(`cannot serialize ${typeof value}`);
}

/** Match Python json.dumps float formatting closely enough for our docs:
 * integers stay integral, floats use JS default repr (shortest round-trip,
 * same as Python for doubles). */
function formatNumber(value: number): string {
  if (!Number.isFinite(value)) throw new Error("non-finite number in document");
  return JSON.stringify(value);
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}
