#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qsmooth/field.hpp"

namespace qsmooth {

using CsvCell = std::variant<std::string, double, std::int64_t>;

// Deterministic CSV writer: fixed column set, shortest round-trip doubles,
// no timestamps (byte-identical reruns are a contract).
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path,
              const std::vector<std::string>& columns);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<CsvCell>& cells);
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
    std::string buffer_;
    std::size_t ncols_;
};

std::string format_double(double v);

// Wavefield snapshot: little header (magic, dims, dtype, grid geometry), then
// raw interleaved complex doubles. One file per snapshot; a JSON manifest
// indexes a snapshot series.
void write_snapshot(const std::filesystem::path& path, const WaveField& u,
                    double time);
WaveField read_snapshot(const std::filesystem::path& path,
                        std::shared_ptr<const MetricField> metric,
                        double* time = nullptr);

class SnapshotSeries {
  public:
    SnapshotSeries(std::filesystem::path dir, std::string stem);
    void add(const WaveField& u, double time);
    // writes <stem>_manifest.json listing files, times, grid geometry
    void finalize(const Grid& g);

  private:
    std::filesystem::path dir_;
    std::string stem_;
    std::vector<std::pair<std::string, double>> entries_;
};

}  // namespace qsmooth
