#include "fides/training/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "fides/errors.hpp"

namespace fides::train {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_report(std::ostream& out, const TrainReport& r) {
  out << "case: " << r.case_id << '\n';
  out << "seed: " << r.seed << '\n';
  out << "layers:";
  for (int s : r.layer_sizes) out << ' ' << s;
  out << '\n';
  out << "iterations_run: " << r.iterations_run << '\n';
  out << "stop_reason: " << to_string(r.stop_reason) << '\n';
  out << "final_phi: " << format_double(r.final_phi) << '\n';
  out << "final_phi_res: " << format_double(r.final_phi_res) << '\n';
  out << "final_phi_bc: " << format_double(r.final_phi_bc) << '\n';
  if (r.recovered_unknowns) out << "final_phi_data: " << format_double(r.final_phi_data) << '\n';
  out << "w_res: " << format_double(r.w_res) << '\n';
  out << "w_bc: " << format_double(r.w_bc) << '\n';
  if (r.recovered_unknowns) out << "w_data: " << format_double(r.w_data) << '\n';
  out << "mse_vs_exact: " << format_double(r.mse_vs_exact) << '\n';
  out << "rel_l2_vs_exact: " << format_double(r.rel_l2_vs_exact) << '\n';
  out << "max_abs_err: " << format_double(r.max_abs_err) << '\n';
  if (r.recovered_unknowns) {
    for (const auto& [name, value] : *r.recovered_unknowns) {
      out << "recovered_" << name << ": " << format_double(value) << '\n';
    }
    out << "clamp_events: " << r.clamp_events << '\n';
  }
  out << "wall_seconds: " << format_double(r.wall_seconds) << '\n';
  if (!r.message.empty()) out << "message: " << r.message << '\n';
}

void write_loss_csv(std::ostream& out, const TrainReport& r) {
  out << "iteration,phi\n";
  for (std::size_t i = 0; i < r.loss_history.size(); ++i) out << i << ',' << format_double(r.loss_history[i]) << '\n';
}

namespace {
std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}
}  // namespace

void save_report(const std::filesystem::path& path, const TrainReport& r) {
  auto f = open_out(path);
  write_report(f, r);
}

void save_loss_csv(const std::filesystem::path& path, const TrainReport& r) {
  auto f = open_out(path);
  write_loss_csv(f, r);
}

}  // namespace fides::train
