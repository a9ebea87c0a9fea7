#pragma once

// Structural check of the run manifest written by --report. Returns an
// empty string when the document is valid, otherwise the first problem.

#include <string>

#include <nlohmann/json.hpp>

namespace bodysep::testing {

inline std::string check_config_object(const nlohmann::json& c) {
  if (!c.is_object()) return "config is not an object";
  for (const char* k : {"normalization", "plot"}) {
    if (!c.contains(k) || !c[k].is_string() || (c[k] != "on" && c[k] != "off")) {
      return std::string("config.") + k + " must be \"on\" or \"off\"";
    }
  }
  if (!c.contains("limit") || !c["limit"].is_number() || !(c["limit"].get<double>() > 0)) return "config.limit";
  if (!c.contains("thickness") || !c["thickness"].is_number_integer()) return "config.thickness";
  if (!c.contains("slice_axis") || !c["slice_axis"].is_number_integer()) return "config.slice_axis";
  if (!c.contains("contour_numbers")) return "config.contour_numbers missing";
  const auto& cn = c["contour_numbers"];
  if (!cn.is_null()) {
    if (!cn.is_array() || cn.empty()) return "config.contour_numbers must be null or a non-empty list";
    for (const auto& k : cn) {
      if (!k.is_number_integer() || k.get<int>() < 1) return "config.contour_numbers entries must be >= 1";
    }
  }
  for (const char* k : {"vmin", "vmax"}) {
    if (!c.contains(k) || !(c[k].is_null() || c[k].is_number())) return std::string("config.") + k;
  }
  return {};
}

inline std::string check_manifest(const nlohmann::json& m) {
  if (!m.is_object()) return "manifest is not an object";
  if (m.value("version", 0) != 1) return "version must be 1";
  if (!m.contains("entries") || !m["entries"].is_array()) return "entries must be an array";
  std::size_t i = 0;
  for (const auto& e : m["entries"]) {
    const std::string at = "entries[" + std::to_string(i++) + "].";
    if (!e.is_object()) return at + " not an object";
    if (!e.contains("input") || !e["input"].is_string()) return at + "input";
    if (!e.contains("config")) return at + "config missing";
    if (auto err = check_config_object(e["config"]); !err.empty()) return at + err;
    for (const char* k : {"mask_path", "panel_path"}) {
      if (!e.contains(k) || !(e[k].is_null() || e[k].is_string())) return at + k;
    }
    if (!e.contains("threshold") || !(e["threshold"].is_null() || e["threshold"].is_number_integer())) {
      return at + "threshold";
    }
    if (e["threshold"].is_number_integer()) {
      const int t = e["threshold"].get<int>();
      if (t < 0 || t > 255) return at + "threshold out of range";
    }
    if (!e.contains("degenerate") || !e["degenerate"].is_boolean()) return at + "degenerate";
    if (!e.contains("contour_count") || !e["contour_count"].is_number_unsigned()) return at + "contour_count";
    if (!e.contains("selected_areas") || !e["selected_areas"].is_array()) return at + "selected_areas";
    std::size_t prev = SIZE_MAX;
    for (const auto& a : e["selected_areas"]) {
      if (!a.is_number_unsigned()) return at + "selected_areas entries";
      if (a.get<std::size_t>() > prev) return at + "selected_areas not descending";
      prev = a.get<std::size_t>();
    }
    if (!e.contains("clipped_fraction")) return at + "clipped_fraction missing";
    const auto& cf = e["clipped_fraction"];
    if (!cf.is_null() && !(cf.is_number() && cf.get<double>() >= 0 && cf.get<double>() <= 1)) {
      return at + "clipped_fraction";
    }
    if ((e["config"]["normalization"] == "on") != !cf.is_null() && e["status"] != "failed") {
      return at + "clipped_fraction present iff normalization on";
    }
    if (!e.contains("warnings") || !e["warnings"].is_array()) return at + "warnings";
    for (const auto& w : e["warnings"]) {
      if (!w.is_string()) return at + "warnings entries";
    }
    if (!e.contains("status") || !e["status"].is_string()) return at + "status";
    const std::string st = e["status"];
    if (st != "ok" && st != "warned" && st != "failed") return at + "status value";
    if (st == "ok" && !e["warnings"].empty()) return at + "ok entry carries warnings";
    if (st == "warned" && e["warnings"].empty()) return at + "warned entry without warnings";
    if (st != "failed" && e["mask_path"].is_null()) return at + "mask_path null on success";
  }
  return {};
}

}  // namespace bodysep::testing
