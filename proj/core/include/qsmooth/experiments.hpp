#pragma once

#include <filesystem>
#include <memory>

#include "qsmooth/config.hpp"
#include "qsmooth/geodesic.hpp"
#include "qsmooth/phasespace.hpp"
#include "qsmooth/probes.hpp"
#include "qsmooth/smoothing.hpp"

namespace qsmooth {

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunReport {
    std::string experiment;
    Config config;  // snapshot
    std::vector<std::string> csv_paths;
    std::vector<Verdict> verdicts;
    double wall_seconds = 0;
    std::int64_t work_units = 0;

    bool all_pass() const {
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }
    void append(const Verdict& v) { verdicts.push_back(v); }
    // JSON report; the timestamp lives only here, never in CSVs.
    void write_json(const std::filesystem::path& path) const;
};

struct ExperimentDescriptor {
    std::string name;
    std::vector<std::string> required_fields;
    std::vector<std::string> outputs;
};

// Stable (name-sorted) table of available experiments.
const std::vector<ExperimentDescriptor>& list_experiments();

// Validates config fields for the named experiment without running it.
void validate_config(const Config& cfg);

// Executes the experiment named in [experiment] name; module errors become
// FAIL verdicts rather than aborting sibling work.
RunReport run_experiment(const Config& cfg,
                         const std::filesystem::path& out_root);

// Shared assembly of the standard objects from a config.
struct Workbench {
    std::shared_ptr<const MetricField> metric;
    std::shared_ptr<const Hamiltonian> H;
    std::shared_ptr<const SpectralCalculus> calc;
    std::shared_ptr<const Propagator> prop;
    CutoffFamily cutoffs;
    std::uint64_t seed = 0;
    int threads = 1;
};

Workbench make_workbench(const Config& cfg);
std::shared_ptr<const MetricField> make_metric(const Config& cfg);

}  // namespace qsmooth
