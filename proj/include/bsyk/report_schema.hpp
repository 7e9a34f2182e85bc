#pragma once

namespace bsyk {

// Published schema for the comparison report; the CLI writes a copy next to
// every report.json it emits and the repository carries the same text under
// schemas/.
inline constexpr const char* kCompareReportSchema = R"JSON({
  "$id": "bsyk.compare_report.v1",
  "type": "object",
  "required": ["schema", "config_hash", "gamma", "J", "N", "observables", "checks"],
  "properties": {
    "schema": {"type": "string"},
    "config_hash": {"type": "string"},
    "gamma": {"type": "number"},
    "J": {"type": "number"},
    "N": {"type": "integer"},
    "page_time_n2": {"type": "number"},
    "observables": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["name", "overlay_csv"],
        "properties": {
          "name": {"type": "string"},
          "overlay_csv": {"type": "string"}
        }
      }
    },
    "checks": {
      "type": "object",
      "properties": {
        "s2_slope": {
          "type": "object",
          "required": ["slope", "theory", "ratio", "pass"],
          "properties": {
            "slope": {"type": "number"},
            "theory": {"type": "number"},
            "ratio": {"type": "number"},
            "window": {"type": "array", "items": {"type": "number"}},
            "pass": {"type": "boolean"}
          }
        },
        "s2_saturation": {
          "type": "object",
          "required": ["sim", "oracle", "ceiling", "pass"],
          "properties": {
            "sim": {"type": "number"},
            "oracle": {"type": "number"},
            "ceiling": {"type": "number"},
            "pass": {"type": "boolean"}
          }
        },
        "f2_jump": {
          "type": "object",
          "required": ["early", "late", "factor", "pass"],
          "properties": {
            "early": {"type": "number"},
            "late": {"type": "number"},
            "factor": {"type": "number"},
            "oracle_late": {"type": "number"},
            "pass": {"type": "boolean"}
          }
        },
        "f1_early": {
          "type": "object",
          "properties": {
            "sim": {"type": "number"},
            "theory": {"type": "number"}
          }
        }
      }
    }
  }
})JSON";

}  // namespace bsyk
