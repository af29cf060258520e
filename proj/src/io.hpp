#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tsdata.hpp"

namespace tsxai {

// Shortest decimal form that parses back to the same double (std::to_chars).
// All file writers funnel through this so re-runs are byte-identical.
std::string format_double(double v);

// Strict numeric parsing; `line` is the 1-based file line for error messages.
double parse_double(std::string_view token, long line);
long long parse_int(std::string_view token, long line);

std::vector<std::string_view> split_csv(std::string_view line);

// Dataset file layout (LF line endings):
//   mtscsv,v1,d=<int>,L=<int>,n=<int>,classes=<int>
//   label,<int>            repeated per instance,
//   <L values> x d lines   channels in row order.
// On read, provenance defaults: name = file stem, seed = 0.
LabeledDataset read_dataset(const std::filesystem::path& path);
void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path);

// Saliency file layout:
//   salcsv,v1,d=<int>,S=<int>,scale=<raw|0to100>
//   <S values> x d lines.
// Segment width is not part of the format; it reads back as 1.
SaliencyMap read_saliency(const std::filesystem::path& path);
void write_saliency(const SaliencyMap& w, const std::filesystem::path& path);

}  // namespace tsxai
