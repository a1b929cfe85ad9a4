#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace voxweave {

struct GoldenRow {
    std::string label;
    std::vector<double> values;
    double reported = 0.0;
    bool source_reported = false;  // published average is known not to be the mean of `values`
};

struct GoldenTable {
    std::string key;
    std::string title;
    int dp = 2;
    std::vector<std::string> columns;
    std::vector<GoldenRow> rows;
};

std::vector<GoldenTable> load_golden_tables(const std::filesystem::path& path);

/// Bundled data directory: $VOXWEAVE_DATA_DIR, else the source tree's data/.
std::filesystem::path default_data_dir();

struct GoldenCheck {
    std::string table;
    std::string label;
    double computed = 0.0;
    double reported = 0.0;
    int dp = 2;
    bool matches = false;
    bool source_reported = false;
};

/// Recomputes every row average with mean_of_subsets at the table's precision.
std::vector<GoldenCheck> check_golden_tables(const std::vector<GoldenTable>& tables);

}  // namespace voxweave
