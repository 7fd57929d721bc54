import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

export function fixtureText(name: string): string {
  return readFileSync(join(here, "fixtures", name), "utf-8");
}

export function polygonYs(polygon: Element): number[] {
  const points = polygon.getAttribute("points") ?? "";
  return points
    .trim()
    .split(/\s+/)
    .map((pair) => Number(pair.split(",")[1]));
}
