#pragma once

#include "fhiqa/dataset/manifest.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fhiqa::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Manifest records shaped like the PIQ23 release: `scenes` scenes over four
// lighting classes, scene sizes drawn around the mean so that the total is
// exactly `total_images`, one Overall score per image.
std::vector<dataset::AnnotatedImage> piq23_like_images(std::size_t scenes, std::size_t total_images,
                                                       std::uint64_t seed);

struct CliRun {
    int code = 0;
    std::string out;
};

// Runs the fhiqa entry point in-process with stdout captured.
CliRun run_cli_captured(const std::vector<std::string>& args);

std::string read_file(const std::filesystem::path& path);

std::filesystem::path source_dir();

}  // namespace fhiqa::testing

#include "fhiqa/evaluation/metrics.hpp"

namespace fhiqa::testing {

struct BenchmarkRow {
    std::string model;
    // SRCC, PLCC, KRCC, MAE for Overall, Exposure, Details.
    std::array<std::array<double, 4>, 3> medians;
};

// Published PIQ23 medians of the reference models.
const std::vector<BenchmarkRow>& benchmark_rows();

// Per-scene records (15 test scenes per cell) spread symmetrically around
// each published median, so that every cell's median is the published value.
std::vector<evaluation::MetricRecord> benchmark_records();

}  // namespace fhiqa::testing
