#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "amcontrast/model.hpp"

namespace amc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericAbort = 3 };

/// Runs one command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// CSV writers shared by the commands; reals use the shortest round-trip form.
std::string format_real(double v);
void write_curve_csv(const std::vector<EpochLog>& log, const std::filesystem::path& path);

}  // namespace amc::cli
