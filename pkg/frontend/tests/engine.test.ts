import { describe, expect, it } from "vitest";

import {
  arousalValue,
  bandOf,
  ema,
  pickAnimo,
  pickColor,
  shouldNotify,
} from "../src/engine.js";
import type { CatalogEntry } from "../src/protocol.js";

const CATALOG: CatalogEntry[] = [
  { id: "bounce", motion_name: "bounce", energy_band: "high", category_tag: "quadrant_pv_ha" },
  { id: "sway", motion_name: "sway", energy_band: "low", category_tag: "quadrant_pv_la" },
  { id: "wobble", motion_name: "wobble", energy_band: "mid", category_tag: "neutral" },
];

describe("ema", () => {
  it("seeds from the first sample", () => {
    expect(ema(null, 70)).toBe(70);
  });
  it("is a fixed point on constant input", () => {
    expect(ema(70, 70, 0.3)).toBe(70);
  });
  it("moves halfway at alpha 0.5", () => {
    expect(ema(60, 100, 0.5)).toBe(80);
  });
});

describe("arousal", () => {
  it("normalizes between the baselines and clamps", () => {
    expect(arousalValue(60, 60, 100)).toBe(0);
    expect(arousalValue(80, 60, 100)).toBe(0.5);
    expect(arousalValue(140, 60, 100)).toBe(1);
    expect(arousalValue(40, 60, 100)).toBe(0);
  });

  it("bands with mid-inclusive thresholds", () => {
    expect(bandOf(0)).toBe("low");
    expect(bandOf(1 / 3)).toBe("mid");
    expect(bandOf(0.5)).toBe("mid");
    expect(bandOf(2 / 3)).toBe("mid");
    expect(bandOf(0.7)).toBe("high");
  });
});

describe("selection", () => {
  it("picks only band-matching animos", () => {
    for (let i = 0; i < 50; i++) {
      expect(pickAnimo("high", CATALOG).energy_band).toBe("high");
      expect(pickAnimo("low", CATALOG).id).toBe("sway");
    }
  });

  it("throws on an uncovered band", () => {
    expect(() => pickAnimo("high", [CATALOG[1]])).toThrow(/no catalog entry/);
  });

  it("draws band-legal colors only", () => {
    for (let i = 0; i < 100; i++) {
      expect(["yellow", "red"]).toContain(pickColor("high"));
      expect(pickColor("mid")).toBe("white");
      expect(["blue", "green"]).toContain(pickColor("low"));
    }
  });
});

describe("parseHrCsv", () => {
  const CSV = "user_id,timestamp,bpm\nu1,0,60\nu1,1,64\nu2,0,70\n";

  it("parses and filters by user", async () => {
    const { parseHrCsv } = await import("../src/engine.js");
    expect(parseHrCsv(CSV).length).toBe(3);
    const mine = parseHrCsv(CSV, "u1");
    expect(mine.map((s) => s.bpm)).toEqual([60, 64]);
  });

  it("rejects bad headers, implausible bpm, and time regressions", async () => {
    const { parseHrCsv } = await import("../src/engine.js");
    expect(() => parseHrCsv("a,b,c\n1,2,3\n")).toThrow(/header/);
    expect(() => parseHrCsv("user_id,timestamp,bpm\nu1,0,10\n")).toThrow(/implausible/);
    expect(() => parseHrCsv("user_id,timestamp,bpm\nu1,5,60\nu1,5,61\n")).toThrow(/increasing/);
  });
});

describe("shouldNotify", () => {
  it("never buzzes without a band change", () => {
    expect(shouldNotify("low", "low", null, 1000)).toBe(false);
  });
  it("buzzes on first change, then debounces", () => {
    expect(shouldNotify("low", "high", null, 1000)).toBe(true);
    expect(shouldNotify("high", "low", 1000, 1100)).toBe(false);
    expect(shouldNotify("high", "low", 1000, 1600)).toBe(true);
  });
});
