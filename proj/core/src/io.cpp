#include "qsmooth/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace qsmooth {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char b2[40];
        std::snprintf(b2, sizeof(b2), "%.*g", prec, v);
        double back;
        std::sscanf(b2, "%lf", &back);
        if (back == v) return b2;
    }
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns)
    : path_(path), ncols_(columns.size()) {
    std::filesystem::create_directories(path.parent_path());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += columns[i];
    }
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (cells.size() != ncols_)
        throw InvalidArgumentError("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        if (std::holds_alternative<std::string>(cells[i]))
            buffer_ += std::get<std::string>(cells[i]);
        else if (std::holds_alternative<double>(cells[i]))
            buffer_ += format_double(std::get<double>(cells[i]));
        else
            buffer_ += std::to_string(std::get<std::int64_t>(cells[i]));
    }
    buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    f.write(buffer_.data(), std::streamsize(buffer_.size()));
}

namespace {
constexpr char kMagic[8] = {'Q', 'S', 'W', 'F', '0', '1', 0, 0};

struct SnapshotHeader {
    char magic[8];
    std::int32_t dim;
    std::int32_t n[3];
    double extent[3];
    double time;
    std::int32_t dtype;  // 0 = complex128 interleaved
    std::int32_t pad;
};
}  // namespace

void write_snapshot(const std::filesystem::path& path, const WaveField& u,
                    double time) {
    std::filesystem::create_directories(path.parent_path());
    SnapshotHeader h{};
    std::memcpy(h.magic, kMagic, 8);
    const Grid& g = u.grid();
    h.dim = g.dim;
    for (int a = 0; a < 3; ++a) {
        h.n[a] = g.n[a];
        h.extent[a] = g.extent[a];
    }
    h.time = time;
    h.dtype = 0;
    h.pad = 0;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(&h), sizeof(h));
    f.write(reinterpret_cast<const char*>(u.v.data()),
            std::streamsize(u.v.size() * sizeof(cplx)));
}

WaveField read_snapshot(const std::filesystem::path& path,
                        std::shared_ptr<const MetricField> metric,
                        double* time) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open snapshot " + path.string());
    SnapshotHeader h{};
    f.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (std::memcmp(h.magic, kMagic, 8) != 0)
        throw Error("bad snapshot magic in " + path.string());
    WaveField u(std::move(metric));
    const Grid& g = u.grid();
    for (int a = 0; a < 3; ++a)
        if (h.n[a] != g.n[a]) throw GridMismatchError("snapshot grid mismatch");
    f.read(reinterpret_cast<char*>(u.v.data()),
           std::streamsize(u.v.size() * sizeof(cplx)));
    if (time) *time = h.time;
    return u;
}

SnapshotSeries::SnapshotSeries(std::filesystem::path dir, std::string stem)
    : dir_(std::move(dir)), stem_(std::move(stem)) {}

void SnapshotSeries::add(const WaveField& u, double time) {
    char name[128];
    std::snprintf(name, sizeof(name), "%s_%05zu.qswf", stem_.c_str(),
                  entries_.size());
    write_snapshot(dir_ / name, u, time);
    entries_.emplace_back(name, time);
}

void SnapshotSeries::finalize(const Grid& g) {
    nlohmann::json j;
    j["stem"] = stem_;
    j["dim"] = g.dim;
    j["n"] = {g.n[0], g.n[1], g.n[2]};
    j["extent"] = {g.extent[0], g.extent[1], g.extent[2]};
    j["dtype"] = "complex128";
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, t] : entries_) {
        files.push_back({{"file", name}, {"time", t}});
    }
    j["snapshots"] = files;
    std::ofstream f(dir_ / (stem_ + "_manifest.json"));
    f << j.dump(2) << "\n";
}

}  // namespace qsmooth
