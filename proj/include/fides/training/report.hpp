#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fides/training/trainer.hpp"

namespace fides::train {

/// `key: value` lines; doubles use 17 significant digits so they round-trip.
void write_report(std::ostream& out, const TrainReport& report);
void write_loss_csv(std::ostream& out, const TrainReport& report);

void save_report(const std::filesystem::path& path, const TrainReport& report);
void save_loss_csv(const std::filesystem::path& path, const TrainReport& report);

std::string format_double(double v);

}  // namespace fides::train
