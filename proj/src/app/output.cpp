#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "qho/errors.hpp"

namespace qho::app {

std::string fmt(double v) {
    if (!std::isfinite(v)) {
        return {};
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_header(std::string_view kind, const std::vector<std::string>& meta,
                       const std::vector<std::string>& columns) {
    std::string out = "# qho " + std::string(kind) + " v" + std::to_string(kCsvSchemaVersion) + "\n";
    for (const auto& line : meta) {
        out += "# " + line + "\n";
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i ? "," : "") + columns[i];
    }
    return out + "\n";
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
}

OutputSet::~OutputSet() {
    if (committed_) {
        return;
    }
    for (const auto& p : written_) {
        std::error_code ec;
        std::filesystem::remove(p, ec);
    }
}

void OutputSet::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    written_.push_back(path);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    if (!f) {
        throw Error("failed writing " + path.string());
    }
    names_.push_back(name);
}

void OutputSet::write_json(const std::string& name, const nlohmann::json& j) {
    write(name, j.dump(2) + "\n");
}

nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace qho::app
