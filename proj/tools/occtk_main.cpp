// Copyright 2026 The occtk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "occtk/pipeline.hpp"
#include "occtk/version.hpp"

namespace {

constexpr int exit_config_error = 2;

void print_summary(const occtk::RunSummary& summary) {
  std::fprintf(stderr, "[occtk] %s: %zu/%zu clips ok, %zu outputs, %.2fs\n",
               summary.command.c_str(), summary.clips_succeeded, summary.clips_total,
               summary.outputs_written, summary.wall_seconds);
  for (const auto& failure : summary.failures) {
    std::fprintf(stderr, "[occtk]   failed %s: %s\n", failure.clip_id.c_str(),
                 failure.error.c_str());
  }
  for (const auto& note : summary.notes) {
    std::fprintf(stderr, "[occtk]   note: %s\n", note.c_str());
  }
}

std::optional<occtk::OccluderCategory> parse_category(const std::string& name) {
  if (name.empty()) return std::nullopt;
  const occtk::OccluderCategory c = occtk::category_from_name(name);
  if (c == occtk::OccluderCategory::custom && name != "custom") {
    occtk::raise(occtk::Errc::config_error, "unknown occluder category: " + name);
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic occlusion dataset synthesis and robustness analysis"};
  app.set_version_flag("--version", occtk::version_string);
  app.require_subcommand(1);

  // synthesize -----------------------------------------------------------
  occtk::SynthesizeConfig syn;
  std::string syn_category;
  std::string syn_resample = "bilinear";
  auto* synthesize = app.add_subcommand("synthesize", "Composite tracked occluders onto clips");
  synthesize->add_option("--frames", syn.frames_root, "Root directory with one frame dir per clip");
  synthesize->add_option("--tracks", syn.tracks_root, "Directory of per-clip track files");
  synthesize->add_option("--manifest", syn.manifest_path, "manifest.json instead of --frames/--tracks");
  synthesize->add_option("--occluders", syn.occluders_root, "Occluder root: <category>/<file>.png")
      ->required();
  synthesize->add_option("--out", syn.out_root, "Output root")->required();
  synthesize->add_option("--seed", syn.seed, "Job seed (default 0, never wall clock)");
  synthesize->add_option("--degrees", syn.degrees, "Occlusion degrees (default 0.25 0.5 0.75)")
      ->delimiter(',');
  synthesize->add_option("--min-opaque-pixels", syn.min_opaque_pixels,
                         "Occluder quality floor (default 30000)");
  synthesize->add_option("--max-gap", syn.max_gap, "Longest track gap to interpolate (frames)");
  synthesize->add_option("--workers", syn.workers, "Worker threads (default $OCCTK_WORKERS or cores)");
  synthesize->add_option("--category", syn_category, "Restrict occluders to one category");
  synthesize->add_option("--resample", syn_resample, "Color resampling: bilinear|nearest")
      ->check(CLI::IsMember({"bilinear", "nearest"}));
  synthesize->add_option("--generation-time", syn.generation_time,
                         "ISO-8601 stamp for annotation rows (fixed default keeps runs reproducible)");

  // metrics ---------------------------------------------------------------
  occtk::MetricsConfig met;
  auto* metrics = app.add_subcommand("metrics", "Recompute metrics.json from stored placements");
  metrics->add_option("--clips", met.clips_root, "A synthesize output tree")->required();
  metrics->add_option("--workers", met.workers, "Worker threads");

  // counterfactual ---------------------------------------------------------
  occtk::CounterfactualConfig cf;
  std::string cf_fill = "constant:114,114,114";
  auto* counterfactual =
      app.add_subcommand("counterfactual", "Erase actors under segmentation masks");
  counterfactual->add_option("--frames", cf.frames_root, "Root directory with one frame dir per clip");
  counterfactual->add_option("--masks", cf.masks_root, "Mask root mirroring the frame layout");
  counterfactual->add_option("--manifest", cf.manifest_path, "manifest.json instead of roots");
  counterfactual->add_option("--out", cf.out_root, "Output root")->required();
  counterfactual->add_option("--fill", cf_fill,
                             "constant:R,G,B | frame_mean | horizontal_inpaint");
  counterfactual->add_flag("--allow-missing-masks", cf.allow_missing_masks,
                           "Pair masks by file name and pass unmasked frames through");
  counterfactual->add_option("--workers", cf.workers, "Worker threads");

  // annotate ----------------------------------------------------------------
  occtk::AnnotateConfig ann;
  std::string ann_schema = "dynamic";
  auto* annotate = app.add_subcommand("annotate", "Write the annotation CSV for synthesized clips");
  annotate->add_option("--clips", ann.clips_root, "A synthesize output tree")->required();
  annotate->add_option("--classes", ann.classes_csv, "CSV clip_id,action_class");
  annotate->add_option("--out", ann.out_path, "Output CSV (default <clips>/annotations.csv)");
  annotate->add_option("--schema", ann_schema, "dynamic|static|interactive")
      ->check(CLI::IsMember({"dynamic", "d", "static", "s", "interactive", "i", "m"}));
  annotate->add_option("--generation-time", ann.generation_time, "ISO-8601 stamp override");

  // car-loss ------------------------------------------------------------------
  occtk::CarLossConfig car;
  auto* carloss =
      app.add_subcommand("car-loss", "Corrected-prediction loss and gradients over logit pairs");
  carloss->add_option("--pairs", car.pairs_path, "JSONL {\"p\":[...],\"c\":[...]}")->required();
  carloss->add_option("--labels", car.labels_path, "JSONL {\"index\":i} or {\"probs\":[...]}")
      ->required();
  carloss->add_option("--alpha", car.loss.alpha, "KL weight (default 1.0)");
  carloss->add_option("--epsilon", car.loss.label_smoothing_epsilon, "Label smoothing in [0, 0.1]");
  carloss->add_flag("--printed-ce", car.loss.printed_ce,
                    "Swap the cross-entropy orientation (needs --epsilon > 0)");
  carloss->add_option("--sweep", car.sweep_alphas, "Emit a mean-loss table over these alphas")
      ->delimiter(',');
  carloss->add_option("--out", car.out_path, "Output path (default stdout)");

  // report ----------------------------------------------------------------------
  occtk::ReportConfig rep;
  std::string rep_drop_order = "diff-then-avg";
  auto* report = app.add_subcommand("report", "Aggregate model prediction dumps");
  report->add_option("--predictions", rep.prediction_paths, "Evaluated prediction JSONL (repeatable)")
      ->required();
  report->add_option("--baseline", rep.baseline_paths, "Baseline prediction JSONL (repeatable)");
  report->add_option("--factors", rep.factors_path, "CSV clip_id,factor for binned drops");
  report->add_option("--parents", rep.parents_path, "CSV class,parent");
  report->add_option("--bins", rep.bin_edges, "Factor bin edges (default 0,0.25,0.5,0.75,1)")
      ->delimiter(',');
  report->add_option("--k", rep.ks, "Accuracy cutoffs (default 1,5)")->delimiter(',');
  report->add_option("--drop-order", rep_drop_order, "diff-then-avg|avg-then-diff")
      ->check(CLI::IsMember({"diff-then-avg", "avg-then-diff"}));
  report->add_option("--out", rep.out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    occtk::RunSummary summary;
    if (*synthesize) {
      syn.category_filter = parse_category(syn_category);
      syn.resample = syn_resample == "nearest" ? occtk::ColorResample::nearest
                                               : occtk::ColorResample::bilinear;
      summary = occtk::run_synthesize(syn);
    } else if (*metrics) {
      summary = occtk::run_metrics(met);
    } else if (*counterfactual) {
      cf.fill = occtk::parse_fill_policy(cf_fill);
      summary = occtk::run_counterfactual(cf);
    } else if (*annotate) {
      ann.schema = occtk::parse_schema_name(ann_schema);
      summary = occtk::run_annotate(ann);
    } else if (*carloss) {
      summary = occtk::run_car_loss(car, std::cout);
    } else if (*report) {
      rep.drop_order = rep_drop_order == "avg-then-diff"
                           ? occtk::DropOrder::average_then_difference
                           : occtk::DropOrder::difference_then_average;
      summary = occtk::run_report(rep);
    }
    print_summary(summary);
    return summary.exit_code();
  } catch (const occtk::Error& e) {
    std::fprintf(stderr, "[occtk] error: %s\n", e.what());
    return e.code() == occtk::Errc::config_error ? exit_config_error : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[occtk] error: %s\n", e.what());
    return 1;
  }
}
