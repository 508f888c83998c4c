#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prelu/data.hpp"
#include "prelu/net.hpp"
#include "prelu/types.hpp"

namespace prelu {

/// FNV-1a over a string; used to stamp every emitted CSV with the hash of
/// the originating config.
std::uint64_t fnv1a(const std::string& s);

/// Minimal CSV emitter. First line is "# config_hash=0x..." when a hash is
/// supplied, then the header row, then data rows at full double precision.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header,
              std::uint64_t config_hash = 0);
    void row(const std::vector<double>& values);
    void row_text(const std::vector<std::string>& values);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::size_t columns_;
};

/// Dataset export/import with header d0..d{D-1},y,z (z is -1 when absent).
void save_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path, Provenance provenance);

/// Versioned flat binary checkpoint of (p, h, D, C, W row-major, V row-major).
void save_checkpoint(const PreluNet& net, const std::string& path);
PreluNet load_checkpoint(const std::string& path);

/// Training history as CSV: epoch,loss,train_acc,test_acc,stable_rank,max_balancedness_drift.
void save_history_csv(const TrainHistory& hist, const std::string& path,
                      std::uint64_t config_hash);

} // namespace prelu
