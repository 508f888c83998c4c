#include "prelu/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace prelu {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << std::setprecision(17);
    return out;
}

} // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header,
                     std::uint64_t config_hash)
    : path_(path), columns_(header.size()) {
    auto out = open_out(path);
    if (config_hash != 0) out << "# config_hash=0x" << std::hex << config_hash << std::dec << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out << header[i] << (i + 1 < header.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
    std::ofstream out(path_, std::ios::app);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i) out << values[i] << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_text(const std::vector<std::string>& values) {
    if (values.size() != columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
    std::ofstream out(path_, std::ios::app);
    for (std::size_t i = 0; i < values.size(); ++i) out << values[i] << (i + 1 < values.size() ? "," : "\n");
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    ds.validate();
    auto out = open_out(path);
    for (Index d = 0; d < ds.dim(); ++d) out << "d" << d << ",";
    out << "y,z\n";
    for (const auto& s : ds.samples) {
        for (Index d = 0; d < s.x.size(); ++d) out << s.x[d] << ",";
        out << s.y << "," << (s.z ? *s.z : Index{-1}) << "\n";
    }
}

Dataset load_dataset_csv(const std::string& path, Provenance provenance) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::size_t columns = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (columns < 3) throw std::runtime_error(path + ": expected header d0..,y,z");
    const Index D = static_cast<Index>(columns - 2);

    Dataset ds;
    ds.provenance = provenance;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        LabeledSample s;
        s.x.resize(D);
        for (Index d = 0; d < D; ++d) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error(path + ": short row");
            s.x[d] = std::stod(cell);
        }
        if (!std::getline(ss, cell, ',')) throw std::runtime_error(path + ": missing y");
        s.y = std::stoi(cell);
        if (!std::getline(ss, cell, ',')) throw std::runtime_error(path + ": missing z");
        const long z = std::stol(cell);
        if (z >= 0) s.z = static_cast<Index>(z);
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

namespace {
constexpr char kCheckpointMagic[4] = {'P', 'R', 'L', 'U'};
constexpr std::uint32_t kCheckpointVersion = 1;
}

void save_checkpoint(const PreluNet& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(kCheckpointMagic, 4);
    auto write_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };
    auto write_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<char*>(&v), 8); };
    write_u32(kCheckpointVersion);
    out.write(reinterpret_cast<const char*>(&net.p), 8);
    write_u64(static_cast<std::uint64_t>(net.width()));
    write_u64(static_cast<std::uint64_t>(net.dim()));
    write_u64(static_cast<std::uint64_t>(net.heads()));
    for (Index j = 0; j < net.width(); ++j)
        for (Index d = 0; d < net.dim(); ++d) {
            const double v = net.W(j, d);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    for (Index j = 0; j < net.width(); ++j)
        for (Index c = 0; c < net.heads(); ++c) {
            const double v = net.V(j, c);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
}

PreluNet load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw std::runtime_error(path + ": not a checkpoint file");
    auto read_u32 = [&]() {
        std::uint32_t v;
        if (!in.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error(path + ": truncated");
        return v;
    };
    auto read_u64 = [&]() {
        std::uint64_t v;
        if (!in.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error(path + ": truncated");
        return v;
    };
    auto read_f64 = [&]() {
        double v;
        if (!in.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error(path + ": truncated");
        return v;
    };
    const std::uint32_t version = read_u32();
    if (version != kCheckpointVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version " + std::to_string(version));
    PreluNet net;
    net.p = read_f64();
    const auto h = static_cast<Index>(read_u64());
    const auto D = static_cast<Index>(read_u64());
    const auto C = static_cast<Index>(read_u64());
    net.W.resize(h, D);
    for (Index j = 0; j < h; ++j)
        for (Index d = 0; d < D; ++d) net.W(j, d) = read_f64();
    net.V.resize(h, C);
    for (Index j = 0; j < h; ++j)
        for (Index c = 0; c < C; ++c) net.V(j, c) = read_f64();
    return net;
}

void save_history_csv(const TrainHistory& hist, const std::string& path,
                      std::uint64_t config_hash) {
    CsvWriter csv(path, {"epoch", "loss", "train_acc", "test_acc", "stable_rank",
                         "max_balancedness_drift"},
                  config_hash);
    for (const auto& r : hist.rows)
        csv.row({static_cast<double>(r.epoch), r.loss, r.train_acc, r.test_acc, r.stable_rank,
                 r.max_balancedness_drift});
}

} // namespace prelu
