import type { Table } from "./csv.js";
import type { Style } from "./style.js";
import { renderScan } from "./render/scan.js";
import { renderBasin } from "./render/basin.js";
import { renderMonteCarlo } from "./render/montecarlo.js";
import { renderRegionMap } from "./render/regionmap.js";
import { renderBiRegion } from "./render/biregion.js";
import { renderGStrip } from "./render/gstrip.js";

export type FigureId =
  | "fig1a" | "fig1b"
  | "fig2a" | "fig2b"
  | "fig3" | "fig4" | "fig5"
  | "fig6a" | "fig6b"
  | "fig7" | "fig8"
  | "fig9a" | "fig9b";

export const FIGURE_IDS: readonly FigureId[] = [
  "fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig4", "fig5",
  "fig6a", "fig6b", "fig7", "fig8", "fig9a", "fig9b",
];

/** One input CSV: file name, schema columns, and whether the producer
 * may legitimately omit it. */
export interface InputSpec {
  file: string;
  columns: readonly string[];
  optional?: boolean;
}

export type TableMap = ReadonlyMap<string, Table | null>;

interface FigureFamily {
  inputs: readonly InputSpec[];
  render(tables: TableMap, inputDir: string, style: Style): string;
}

// ----------------------------------------------------------------------
// Interchange schemas (version v1)
// ----------------------------------------------------------------------

const RECORDS = [
  "run", "t1_yr", "r_pre", "r_post", "N_b", "P_b", "phi_b",
  "kind", "rescues", "converged_pre",
] as const;
const HIST_PHASE = [
  "bin_lo_rad", "bin_hi_rad", "count_all", "count_b", "count_p",
] as const;
const SIGNAL = ["start_yr", "duration_yr", "r_value", "type"] as const;
const TIMESERIES = ["t_yr", "r", "N", "P"] as const;
const MEASURE_WINDOW = ["phi_rad", "mass"] as const;
const MEASURE_BINS = ["bin_lo_rad", "bin_hi_rad", "mass"] as const;
const CYCLE_PLAIN = ["t_yr", "N", "P", "phi_rad"] as const;
const CYCLE_MEMBER = ["t_yr", "N", "P", "phi_rad", "membership"] as const;
const XY = ["N", "P"] as const;
const BRANCH = [
  "r", "kind", "label", "n_min", "n_max", "p_min", "p_max", "period_yr",
] as const;
const EQ_BRANCHES = ["r", "label", "N", "P", "stability", "ecological"] as const;
const EQUILIBRIA = [
  "label", "N", "P", "eig1_re_per_yr", "eig1_im_per_yr",
  "eig2_re_per_yr", "eig2_im_per_yr", "stability", "ecological",
] as const;
const BASIN_META = [
  "r_cycle", "r_threshold", "class", "fraction_outside",
  "phi_lo_rad", "phi_hi_rad", "width_rad",
] as const;
const PATH_PHASES = ["r2", "class", "phi_lo_rad", "phi_hi_rad", "width_rad"] as const;
const PORTRAITS = ["index", "r2", "class", "fraction_outside"] as const;
const STRIP = ["r", "N", "P", "phi_rad", "region"] as const;

function need(tables: TableMap, file: string): Table {
  const table = tables.get(file);
  if (table === null || table === undefined) {
    throw new Error(`required input ${file} was not loaded`);
  }
  return table;
}

function opt(tables: TableMap, file: string): Table | null {
  return tables.get(file) ?? null;
}

// ----------------------------------------------------------------------
// Figure families
// ----------------------------------------------------------------------

const scanFamily: FigureFamily = {
  inputs: [
    { file: "branch.csv", columns: BRANCH },
    { file: "equilibria_branches.csv", columns: EQ_BRANCHES },
  ],
  render: (tables, _dir, style) =>
    renderScan(
      need(tables, "branch.csv"),
      need(tables, "equilibria_branches.csv"),
      style,
    ),
};

const basinFamily: FigureFamily = {
  inputs: [
    { file: "cycle.csv", columns: CYCLE_MEMBER },
    { file: "threshold.csv", columns: XY },
    { file: "equilibria.csv", columns: EQUILIBRIA },
    { file: "basin_meta.csv", columns: BASIN_META },
  ],
  render: (tables, _dir, style) =>
    renderBasin(
      need(tables, "cycle.csv"),
      need(tables, "threshold.csv"),
      need(tables, "equilibria.csv"),
      need(tables, "basin_meta.csv"),
      style,
    ),
};

const montecarloFamily: FigureFamily = {
  inputs: [
    { file: "records.csv", columns: RECORDS },
    { file: "hist_phase.csv", columns: HIST_PHASE },
    { file: "example_signal.csv", columns: SIGNAL },
    { file: "example_run.csv", columns: TIMESERIES },
    { file: "measure_window.csv", columns: MEASURE_WINDOW, optional: true },
    { file: "measure_bins.csv", columns: MEASURE_BINS, optional: true },
    { file: "overlay_cycle.csv", columns: CYCLE_PLAIN, optional: true },
    { file: "overlay_threshold.csv", columns: XY, optional: true },
  ],
  render: (tables, _dir, style) =>
    renderMonteCarlo(
      need(tables, "records.csv"),
      need(tables, "hist_phase.csv"),
      {
        signal: need(tables, "example_signal.csv"),
        run: need(tables, "example_run.csv"),
      },
      {
        window: opt(tables, "measure_window.csv"),
        bins: opt(tables, "measure_bins.csv"),
      },
      {
        cycle: opt(tables, "overlay_cycle.csv"),
        threshold: opt(tables, "overlay_threshold.csv"),
      },
      style,
    ),
};

function regionFamily(secondName: string): FigureFamily {
  return {
    inputs: [{ file: "grid.csv", columns: ["r", secondName, "class"] }],
    render: (tables, _dir, style) =>
      renderRegionMap(need(tables, "grid.csv"), secondName, style),
  };
}

function biregionFamily(secondName: string): FigureFamily {
  return {
    inputs: [
      { file: "grid.csv", columns: ["r2", secondName, "class"] },
      { file: "path_phases.csv", columns: PATH_PHASES },
      { file: "portraits.csv", columns: PORTRAITS, optional: true },
    ],
    render: (tables, dir, style) =>
      renderBiRegion(
        need(tables, "grid.csv"),
        need(tables, "path_phases.csv"),
        opt(tables, "portraits.csv"),
        dir,
        secondName,
        style,
      ),
  };
}

const gstripFamily: FigureFamily = {
  inputs: [
    { file: "strip.csv", columns: STRIP },
    { file: "threshold.csv", columns: XY },
    { file: "records.csv", columns: RECORDS, optional: true },
  ],
  render: (tables, _dir, style) =>
    renderGStrip(
      need(tables, "strip.csv"),
      need(tables, "threshold.csv"),
      opt(tables, "records.csv"),
      style,
    ),
};

export const FIGURES: Record<FigureId, FigureFamily> = {
  fig1a: scanFamily,
  fig1b: scanFamily,
  fig2a: basinFamily,
  fig2b: basinFamily,
  fig3: montecarloFamily,
  fig4: montecarloFamily,
  fig5: montecarloFamily,
  fig6a: regionFamily("delta"),
  fig6b: regionFamily("q"),
  fig7: biregionFamily("delta"),
  fig8: biregionFamily("q"),
  fig9a: gstripFamily,
  fig9b: gstripFamily,
};

export function isFigureId(value: string): value is FigureId {
  return (FIGURE_IDS as readonly string[]).includes(value);
}
