#include "msfwi/data_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "msfwi/errors.hpp"

namespace msfwi {

namespace {
constexpr int kHeaderSize = 64;
}

void SpectraData::validate() const {
    if (omegas.empty()) throw IoError("spectra: empty frequency list");
    if (receivers.empty()) throw IoError("spectra: empty receiver list");
    if (records.size() != omegas.size())
        throw IoError("spectra: record count does not match frequency count");
    double prev = 0.0;
    for (double w : omegas) {
        if (!(w > prev)) throw IoError("spectra: frequencies must be positive and increasing");
        prev = w;
    }
    for (const auto& rec : records) {
        if (rec.size() != n_receivers())
            throw IoError("spectra: record length does not match receiver count");
        if (!rec.allFinite()) throw IoError("spectra: non-finite sample");
    }
}

void write_spectra(const SpectraData& data, const std::string& path) {
    data.validate();
    const int q = data.n_frequencies(), nr = data.n_receivers();

    char header[kHeaderSize + 1];
    std::snprintf(header, sizeof(header), "MSFWI01 spc %d %d", q, nr);
    std::string head(header);
    head.resize(kHeaderSize, ' ');
    head[kHeaderSize - 1] = '\n';

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(head.data(), kHeaderSize);
    out.write(reinterpret_cast<const char*>(data.omegas.data()), q * sizeof(double));
    std::vector<std::int64_t> recv(2 * nr);
    for (int r = 0; r < nr; ++r) {
        recv[2 * r] = data.receivers[r].first;
        recv[2 * r + 1] = data.receivers[r].second;
    }
    out.write(reinterpret_cast<const char*>(recv.data()), recv.size() * sizeof(std::int64_t));
    for (const auto& rec : data.records)
        out.write(reinterpret_cast<const char*>(rec.data()), nr * 2 * sizeof(double));
    if (!out) throw IoError("write failed for '" + path + "'");

    nlohmann::json meta;
    if (data.seed) meta["seed"] = *data.seed;
    if (data.snr_db) meta["snr_db"] = *data.snr_db;
    for (const auto& ev : data.true_events)
        meta["true_events"].push_back({{"z_m", ev.z_m},
                                       {"x_m", ev.x_m},
                                       {"f_central_hz", ev.f_central_hz},
                                       {"t_central_s", ev.t_central_s}});
    std::ofstream js(path + ".meta.json", std::ios::trunc);
    js << meta.dump(2) << "\n";
}

SpectraData read_spectra(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    char header[kHeaderSize + 1] = {};
    in.read(header, kHeaderSize);
    if (in.gcount() != kHeaderSize) throw IoError("'" + path + "': truncated header");
    char magic[16] = {}, kind[16] = {};
    int q = 0, nr = 0;
    if (std::sscanf(header, "%15s %15s %d %d", magic, kind, &q, &nr) != 4 ||
        std::strcmp(magic, "MSFWI01") != 0 || std::strcmp(kind, "spc") != 0)
        throw IoError("'" + path + "': malformed spectra header");
    if (q <= 0 || nr <= 0) throw IoError("'" + path + "': invalid spectra dimensions");

    const long expected = kHeaderSize + q * 8 + 2 * nr * 8 + static_cast<long>(q) * nr * 16;
    in.seekg(0, std::ios::end);
    if (static_cast<long>(in.tellg()) != expected)
        throw IoError("'" + path + "': dimension mismatch between header and payload");
    in.seekg(kHeaderSize);

    SpectraData data;
    data.omegas.resize(q);
    in.read(reinterpret_cast<char*>(data.omegas.data()), q * sizeof(double));
    std::vector<std::int64_t> recv(2 * nr);
    in.read(reinterpret_cast<char*>(recv.data()), recv.size() * sizeof(std::int64_t));
    data.receivers.resize(nr);
    for (int r = 0; r < nr; ++r)
        data.receivers[r] = {static_cast<int>(recv[2 * r]), static_cast<int>(recv[2 * r + 1])};
    data.records.resize(q);
    for (int k = 0; k < q; ++k) {
        data.records[k].resize(nr);
        in.read(reinterpret_cast<char*>(data.records[k].data()), nr * 2 * sizeof(double));
    }
    if (!in) throw IoError("'" + path + "': truncated payload");
    data.validate();

    const std::string meta_path = path + ".meta.json";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream js(meta_path);
        nlohmann::json meta = nlohmann::json::parse(js, nullptr, false);
        if (!meta.is_discarded()) {
            if (meta.contains("seed")) data.seed = meta["seed"].get<std::uint64_t>();
            if (meta.contains("snr_db")) data.snr_db = meta["snr_db"].get<double>();
            if (meta.contains("true_events"))
                for (const auto& ev : meta["true_events"])
                    data.true_events.push_back({ev.value("z_m", 0.0), ev.value("x_m", 0.0),
                                                ev.value("f_central_hz", 0.0),
                                                ev.value("t_central_s", 0.0)});
        }
    }
    return data;
}

}  // namespace msfwi
