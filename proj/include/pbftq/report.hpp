#pragma once

// CSV and JSON row emission. Column order is fixed per mode:
//
//   lambda,mu,f,n,c,rho,stable,e_k,e_m,gamma,upsilon,gamma_minus_lambda,error_code
//   [compare]           oracle_e_k,oracle_e_m,oracle_gamma,oracle_upsilon,oracle_level_cap
//   [simulate, compare] sim_e_k,sim_e_k_hw,sim_e_m,sim_e_m_hw,sim_gamma,sim_gamma_hw,
//                       sim_events,sim_pegged_blocks
//
// Reals are written with 17 significant digits; missing values are empty
// (CSV) or null (JSON).

#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pbftq/sweep.hpp"

namespace pbftq {

inline std::vector<std::string> csv_columns(Mode mode) {
  std::vector<std::string> cols{"lambda", "mu",    "f",     "n",       "c",
                                "rho",    "stable", "e_k",  "e_m",     "gamma",
                                "upsilon", "gamma_minus_lambda", "error_code"};
  if (mode == Mode::kCompare) {
    for (const char* c : {"oracle_e_k", "oracle_e_m", "oracle_gamma",
                          "oracle_upsilon", "oracle_level_cap"}) {
      cols.emplace_back(c);
    }
  }
  if (mode == Mode::kSimulate || mode == Mode::kCompare) {
    for (const char* c : {"sim_e_k", "sim_e_k_hw", "sim_e_m", "sim_e_m_hw",
                          "sim_gamma", "sim_gamma_hw", "sim_events",
                          "sim_pegged_blocks"}) {
      cols.emplace_back(c);
    }
  }
  return cols;
}

/// A cell: absent, integer, real, boolean or text.
using Cell = std::variant<std::monostate, long long, double, bool, std::string>;

inline std::vector<Cell> row_cells(const SweepRow& r, Mode mode) {
  auto real = [](std::optional<double> v) -> Cell {
    if (v) return *v;
    return std::monostate{};
  };
  std::vector<Cell> cells{r.lambda, r.mu, static_cast<long long>(r.f),
                          static_cast<long long>(r.n), r.c, real(r.rho)};
  cells.push_back(r.stable ? Cell{*r.stable} : Cell{});
  const auto& m = r.metrics;
  cells.push_back(real(m ? std::optional(m->e_k) : std::nullopt));
  cells.push_back(real(m ? std::optional(m->e_m) : std::nullopt));
  cells.push_back(real(m ? std::optional(m->gamma) : std::nullopt));
  cells.push_back(real(m ? std::optional(m->upsilon) : std::nullopt));
  cells.push_back(real(m ? std::optional(m->gamma_minus_lambda) : std::nullopt));
  cells.push_back(r.error_code);

  if (mode == Mode::kCompare) {
    const auto& o = r.oracle;
    cells.push_back(real(o ? std::optional(o->e_k) : std::nullopt));
    cells.push_back(real(o ? std::optional(o->e_m) : std::nullopt));
    cells.push_back(real(o ? std::optional(o->gamma) : std::nullopt));
    cells.push_back(real(o ? std::optional(o->upsilon) : std::nullopt));
    cells.push_back(r.oracle && r.oracle_level_cap
                        ? Cell{static_cast<long long>(*r.oracle_level_cap)}
                        : Cell{});
  }
  if (mode == Mode::kSimulate || mode == Mode::kCompare) {
    const auto& s = r.sim;
    auto opt = [&](auto member) -> Cell {
      if (!s) return std::monostate{};
      return static_cast<double>((*s).*member);
    };
    cells.push_back(opt(&SimEstimates::e_k_mean));
    cells.push_back(opt(&SimEstimates::e_k_half_width));
    cells.push_back(opt(&SimEstimates::e_m_mean));
    cells.push_back(opt(&SimEstimates::e_m_half_width));
    cells.push_back(opt(&SimEstimates::gamma_mean));
    cells.push_back(opt(&SimEstimates::gamma_half_width));
    cells.push_back(s ? Cell{static_cast<long long>(s->events)} : Cell{});
    cells.push_back(s ? Cell{static_cast<long long>(s->pegged_blocks)} : Cell{});
  }
  return cells;
}

inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

inline std::string csv_field(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                      Mode mode) {
  const auto cols = csv_columns(mode);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& row : rows) {
    const auto cells = row_cells(row, mode);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << (i ? "," : "") << csv_field(cells[i]);
    }
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows, Mode mode) {
  const auto cols = csv_columns(mode);
  auto out = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    const auto cells = row_cells(row, mode);
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              obj[cols[i]] = nullptr;
            } else {
              obj[cols[i]] = v;
            }
          },
          cells[i]);
    }
    out.push_back(std::move(obj));
  }
  return out;
}

inline void write_json(std::ostream& out, const std::vector<SweepRow>& rows,
                       Mode mode) {
  out << to_json(rows, mode).dump(2) << '\n';
}

inline void write_rows(std::ostream& out, const std::vector<SweepRow>& rows,
                       Mode mode, Format format) {
  if (format == Format::kCsv) {
    write_csv(out, rows, mode);
  } else {
    write_json(out, rows, mode);
  }
}

}  // namespace pbftq
