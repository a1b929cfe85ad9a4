#include "voxweave/golden.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "voxweave/error.hpp"
#include "voxweave/metrics.hpp"

#ifndef VOXWEAVE_DATA_DIR
#define VOXWEAVE_DATA_DIR "data"
#endif

namespace voxweave {

std::vector<GoldenTable> load_golden_tables(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open golden tables " + path.string());
    std::vector<GoldenTable> tables;
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        for (const auto& t : doc.at("tables")) {
            GoldenTable table;
            table.key = t.at("key").get<std::string>();
            table.title = t.value("title", table.key);
            table.dp = t.at("dp").get<int>();
            table.columns = t.at("columns").get<std::vector<std::string>>();
            for (const auto& r : t.at("rows")) {
                GoldenRow row;
                row.label = r.at("label").get<std::string>();
                row.values = r.at("values").get<std::vector<double>>();
                row.reported = r.at("reported").get<double>();
                row.source_reported = r.value("source_reported", false);
                if (row.values.size() != table.columns.size())
                    throw InvalidConfig("golden row " + table.key + "/" + row.label + " has " +
                                        std::to_string(row.values.size()) + " values for " +
                                        std::to_string(table.columns.size()) + " columns");
                table.rows.push_back(std::move(row));
            }
            tables.push_back(std::move(table));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig("golden tables " + path.string() + ": " + e.what());
    }
    return tables;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("VOXWEAVE_DATA_DIR"); env && *env) return env;
    return VOXWEAVE_DATA_DIR;
}

std::vector<GoldenCheck> check_golden_tables(const std::vector<GoldenTable>& tables) {
    std::vector<GoldenCheck> out;
    for (const GoldenTable& t : tables) {
        for (const GoldenRow& r : t.rows) {
            GoldenCheck c;
            c.table = t.key;
            c.label = r.label;
            c.dp = t.dp;
            c.computed = mean_of_subsets(r.values, t.dp);
            c.reported = r.reported;
            c.matches = round_half_away(r.reported, t.dp) == c.computed;
            c.source_reported = r.source_reported;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace voxweave
