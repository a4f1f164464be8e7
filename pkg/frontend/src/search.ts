/**
 * Search screen: basic text scan, advanced boolean queries, and CSV export
 * of either the checked rows or (with nothing checked) the whole result.
 */

import { ApiClient } from "./client.js";
import type { ItemRow } from "./types.js";

export class SearchView {
  results: ItemRow[] = [];
  selected = new Set<string>();
  lastQueryError: string | null = null;

  constructor(private readonly client: ApiClient) {}

  async basic(text: string, table = "item"): Promise<ItemRow[]> {
    this.results = await this.client.get<ItemRow[]>("/search", {
      q: text,
      table,
    });
    this.selected.clear();
    return this.results;
  }

  /** `query` uses the service grammar, e.g. `status eq Available and code contains X`. */
  async advanced(
    query: string,
    table = "item",
    page = 1,
    pageSize = 50,
  ): Promise<ItemRow[]> {
    this.lastQueryError = null;
    this.results = await this.client.post<ItemRow[]>("/search/advanced", {
      query,
      table,
      page,
      page_size: pageSize,
    });
    this.selected.clear();
    return this.results;
  }

  toggle(itemId: string): void {
    if (this.selected.has(itemId)) this.selected.delete(itemId);
    else this.selected.add(itemId);
  }

  /** Rows the export acts on: the selection, or everything when none. */
  exportTargets(): ItemRow[] {
    if (this.selected.size === 0) return this.results;
    return this.results.filter((r) => this.selected.has(r.item_id));
  }

  exportCsv(): string {
    return toCsv(this.exportTargets());
  }
}

const CSV_COLUMNS: (keyof ItemRow & string)[] = [
  "item_id",
  "code",
  "item_description",
  "serial_number",
  "status",
  "loc_id",
  "owner_id",
];

function escapeCell(value: unknown): string {
  const text = value === null || value === undefined ? "" : String(value);
  return /[",\r\n]/.test(text) ? `"${text.replace(/"/g, '""')}"` : text;
}

export function toCsv(rows: ItemRow[]): string {
  const lines = [CSV_COLUMNS.join(",")];
  for (const row of rows) {
    lines.push(CSV_COLUMNS.map((c) => escapeCell(row[c])).join(","));
  }
  return lines.join("\r\n") + "\r\n";
}
