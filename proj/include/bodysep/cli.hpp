#pragma once

// Batch command-line front end. Every input is processed independently and
// gets one manifest entry; a failure on one input never stops the others.
//
// Exit codes: 0 all ok, 1 some input produced warnings (degenerate slices),
// 2 some input failed, 3 usage error.

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "bodysep/image_io.hpp"
#include "bodysep/pipeline.hpp"

namespace bodysep::cli {

enum ExitCode : int { kOk = 0, kWarned = 1, kFailed = 2, kUsage = 3 };

enum class Status { ok, warned, failed };

constexpr std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::ok: return "ok";
    case Status::warned: return "warned";
    case Status::failed: return "failed";
  }
  return "failed";
}

struct ManifestEntry {
  std::string input;
  MaskPipelineConfig config;
  bool volume = false;
  std::optional<std::string> mask_path;
  std::optional<std::string> panel_path;
  std::vector<MaskReport> reports;  // one for 2D, one per slice for volumes
  std::optional<std::string> error;
  Status status = Status::ok;
};

inline nlohmann::json to_json(const ManifestEntry& e) {
  auto opt_str = [](const std::optional<std::string>& s) {
    return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
  };
  nlohmann::json j{{"input", e.input},
                   {"config", bodysep::to_json(e.config)},
                   {"mask_path", opt_str(e.mask_path)},
                   {"panel_path", opt_str(e.panel_path)},
                   {"status", std::string(to_string(e.status))}};
  if (!e.volume && e.reports.size() == 1) {
    const nlohmann::json r = bodysep::to_json(e.reports.front());
    for (const char* k : {"threshold", "degenerate", "contour_count", "selected_areas",
                          "clipped_fraction", "warnings"}) {
      j[k] = r[k];
    }
  } else {
    // Volume (or nothing processed): aggregate fields, per-slice detail in "slices".
    bool degenerate = false;
    std::size_t contours = 0;
    double clipped = 0.0;
    std::vector<std::string> warnings;
    nlohmann::json slices = nlohmann::json::array();
    for (std::size_t i = 0; i < e.reports.size(); ++i) {
      const MaskReport& r = e.reports[i];
      degenerate = degenerate || r.degenerate;
      contours += r.contour_count;
      clipped += r.clipped_fraction.value_or(0.0);
      for (const auto& w : r.warnings) warnings.push_back("slice " + std::to_string(i) + ": " + w);
      slices.push_back(bodysep::to_json(r));
    }
    j["threshold"] = nullptr;
    j["degenerate"] = degenerate;
    j["contour_count"] = contours;
    j["selected_areas"] = nlohmann::json::array();
    j["clipped_fraction"] = e.config.normalization && !e.reports.empty()
                                ? nlohmann::json(clipped / static_cast<double>(e.reports.size()))
                                : nlohmann::json(nullptr);
    j["warnings"] = warnings;
    if (e.volume) j["slices"] = std::move(slices);
  }
  if (e.error) {
    j["error"] = *e.error;
    j["warnings"].push_back(*e.error);
  }
  return j;
}

inline nlohmann::json manifest_json(const std::vector<ManifestEntry>& entries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back(to_json(e));
  return {{"version", 1}, {"entries", std::move(arr)}};
}

namespace detail {

inline bool has_glob_chars(const std::string& s) {
  return s.find_first_of("*?[") != std::string::npos;
}

inline std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

/// Expands globs and (in 2D mode) directories. A pattern that matches
/// nothing stays in the list so it is reported as a failed input.
inline std::vector<std::string> expand_inputs(const std::vector<std::string>& raw, bool volume) {
  std::vector<std::string> out;
  for (const std::string& in : raw) {
    if (has_glob_chars(in) && !fs::exists(in)) {
      auto matches = expand_glob(in);
      if (matches.empty()) out.push_back(in);
      out.insert(out.end(), matches.begin(), matches.end());
    } else if (!volume && fs::is_directory(in)) {
      std::vector<std::string> files;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && is_supported_image(entry.path())) {
          files.push_back(entry.path().string());
        }
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) out.push_back(in);
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(in);
    }
  }
  return out;
}

/// Output stem per input, made unique in input order.
inline std::vector<std::string> unique_stems(const std::vector<std::string>& inputs) {
  std::map<std::string, int> seen;
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    fs::path p(in);
    std::string stem = p.has_stem() && p.stem() != "." ? p.stem().string() : p.filename().string();
    if (stem.empty() || stem == "." || stem == "..") stem = "input";
    const int n = seen[stem]++;
    out.push_back(n == 0 ? stem : stem + "_" + std::to_string(n + 1));
  }
  return out;
}

inline Status status_of(const std::vector<MaskReport>& reports) {
  for (const auto& r : reports) {
    if (!r.warnings.empty()) return Status::warned;
  }
  return Status::ok;
}

inline void process_2d(ManifestEntry& e, const fs::path& out_dir, const std::string& stem,
                       bool dump_contours) {
  const ScalarImage2D img = load_image(e.input);
  MaskResult res = body_mask_2d(img, e.config);
  const fs::path mask_path = out_dir / (stem + "_mask.png");
  save_mask(res.mask, mask_path);
  e.mask_path = mask_path.string();
  if (res.panel) {
    const fs::path panel_path = out_dir / (stem + "_panel.png");
    save_panel(*res.panel, panel_path);
    e.panel_path = panel_path.string();
  }
  if (dump_contours && !res.report.degenerate) {
    const auto t = otsu_threshold(histogram(res.byte_image));
    std::ofstream(out_dir / (stem + "_contours.json"))
        << bodysep::to_json(find_contours(binarize(res.byte_image, t.threshold))).dump() << '\n';
  }
  e.reports.push_back(std::move(res.report));
}

inline void process_3d(ManifestEntry& e, const fs::path& out_dir, const std::string& stem,
                       unsigned threads) {
  const Volume3D vol = load_volume(e.input);
  VolumeMaskResult res = body_mask_3d(vol, e.config, threads);
  const fs::path dir = out_dir / stem;
  save_mask_volume(res.mask, dir);
  e.mask_path = dir.string();
  bool any_panel = false;
  for (std::size_t i = 0; i < res.panels.size(); ++i) {
    if (res.panels[i]) {
      save_panel(*res.panels[i], dir / slice_file_name("panel", i, ".png"));
      any_panel = true;
    }
  }
  if (any_panel) e.panel_path = dir.string();
  e.reports = std::move(res.reports);
}

}  // namespace detail

/// Runs the CLI on already split arguments (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Separate the body from the dark background of grayscale radiological images."};
  app.name(args.empty() ? "bodysep" : fs::path(args.front()).filename().string());

  std::vector<std::string> inputs;
  std::string output_dir = "bodysep_out";
  std::string normalize, plot;
  double limit = 3.0;
  std::vector<int> contour_numbers;
  int thickness = kFilled;
  double vmin = 0, vmax = 0;
  bool volume = false;
  int slice_axis = 0;
  std::string config_path, report_path;
  unsigned threads = 1;
  bool dump_contours = false;

  const auto on_off = CLI::IsMember({"on", "off"}, CLI::ignore_case);
  app.add_option("-i,--input", inputs, "Input file, directory or glob (repeatable)")->required();
  app.add_option("-o,--output-dir", output_dir, "Directory for masks and panels")
      ->capture_default_str();
  auto* o_norm = app.add_option("--normalize", normalize, "Z-score normalization before the byte cast (on|off)")
                     ->check(on_off);
  auto* o_limit = app.add_option("--limit", limit, "Outlier limit in z-score units");
  auto* o_cn = app.add_option("--contour-number", contour_numbers,
                              "Keep only the k-th largest contour(s), e.g. 1 or 2,3")
                   ->delimiter(',');
  auto* o_thick = app.add_option("--thickness", thickness, "Contour thickness, -1 fills the interior");
  auto* o_plot = app.add_option("--plot", plot, "Write the three-pane panel image (on|off)")->check(on_off);
  auto* o_vmin = app.add_option("--vmin", vmin, "Display window lower bound (panel only)");
  auto* o_vmax = app.add_option("--vmax", vmax, "Display window upper bound (panel only)");
  app.add_flag("--volume", volume, "Treat each input as a 3D volume (directory of slices or .raw with depth)");
  auto* o_axis = app.add_option("--slice-axis", slice_axis, "Axis along which volumes are sliced (0, 1, 2)");
  app.add_option("--config", config_path, "JSON preset; command-line flags override it");
  app.add_option("--report", report_path, "Write the run manifest as JSON");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
  app.add_flag("--dump-contours", dump_contours, "Write the contours of each 2D input as JSON");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  if (o_axis->count() > 0 && !volume) {
    err << "error: --slice-axis only applies with --volume\n";
    return kUsage;
  }

  MaskPipelineConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorKind::io, "cannot open config '" + config_path + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, "config '" + config_path + "': " + e.what());
      }
      apply_config_json(config, j);
    }
    if (o_norm->count()) config.normalization = CLI::detail::to_lower(normalize) == "on";
    if (o_limit->count()) config.limit = limit;
    if (o_cn->count()) config.contour_numbers = contour_numbers;
    if (o_thick->count()) config.thickness = thickness;
    if (o_plot->count()) config.plot = CLI::detail::to_lower(plot) == "on";
    if (o_vmin->count()) config.vmin = vmin;
    if (o_vmax->count()) config.vmax = vmax;
    if (o_axis->count()) config.slice_axis = slice_axis;
    config.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    fs::create_directories(output_dir);
  } catch (const fs::filesystem_error& e) {
    err << "error: cannot create output directory: " << e.what() << "\n";
    return kFailed;
  }

  const std::vector<std::string> expanded = detail::expand_inputs(inputs, volume);
  const std::vector<std::string> stems = detail::unique_stems(expanded);
  std::vector<ManifestEntry> entries(expanded.size());

  auto process = [&](std::size_t i) {
    ManifestEntry& e = entries[i];
    e.input = expanded[i];
    e.config = config;
    e.volume = volume;
    try {
      if (volume) {
        detail::process_3d(e, output_dir, stems[i], threads);
      } else {
        detail::process_2d(e, output_dir, stems[i], dump_contours);
      }
      e.status = detail::status_of(e.reports);
    } catch (const std::exception& ex) {
      e.status = Status::failed;
      e.error = ex.what();
    }
  };

  if (volume || threads <= 1 || entries.size() <= 1) {
    for (std::size_t i = 0; i < entries.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < std::min<std::size_t>(threads, entries.size()); ++k) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) process(i);
      });
    }
  }

  int code = kOk;
  for (const auto& e : entries) {
    out << to_string(e.status) << "\t" << e.input;
    if (e.error) out << "\t" << *e.error;
    out << "\n";
    if (e.status == Status::failed) code = kFailed;
    else if (e.status == Status::warned && code == kOk) code = kWarned;
  }

  if (!report_path.empty()) {
    std::ofstream rep(report_path);
    if (!rep) {
      err << "error: cannot write report '" << report_path << "'\n";
      return kFailed;
    }
    rep << manifest_json(entries).dump(2) << '\n';
  }
  return code;
}

inline int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace bodysep::cli
