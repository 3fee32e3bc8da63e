#pragma once

#include <filesystem>
#include <string>

#include "ccep/archive.hpp"

namespace ccep {

// curve.csv: iteration,flops_reduction,test_acc,acc_drop (row 0 = baseline).
std::string curve_csv(const StoredArchive& archive);
// widths.csv: iteration,layer,width for every prunable layer.
std::string widths_csv(const StoredArchive& archive);
// Fixed-width text table; accuracies are printed with the same digits as
// the JSON entries.
std::string report_table(const StoredArchive& archive);

std::string curve_svg(const StoredArchive& archive);
std::string widths_svg(const StoredArchive& archive);

// Reads `archive_dir` and writes curve.csv, curve.svg, widths.csv,
// widths.svg and table.txt into `out_dir`. Returns the table text.
std::string write_report(const std::filesystem::path& archive_dir, const std::filesystem::path& out_dir);

}  // namespace ccep
