#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qho::app {

inline constexpr int kCsvSchemaVersion = 1;

// %.17g for finite values, empty for NaN and +-inf so that CSV readers see a missing cell.
std::string fmt(double v);

// "# qho <kind> v1" followed by extra '#' lines and the column row.
std::string csv_header(std::string_view kind, const std::vector<std::string>& meta,
                       const std::vector<std::string>& columns);

// Files written through an OutputSet are deleted again unless commit() runs.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);
    ~OutputSet();
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const nlohmann::json& j);
    void commit() { committed_ = true; }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    std::vector<std::string> names_;
    bool committed_ = false;
};

nlohmann::json number_or_null(double v);

}  // namespace qho::app
