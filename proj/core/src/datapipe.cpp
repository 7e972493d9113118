#include "edgebin/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "edgebin/graph.hpp"
#include "edgebin/rng.hpp"

namespace edgebin {

DatasetManifest read_manifest(const std::filesystem::path& csv) {
    std::ifstream f(csv);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + csv.string());
    DatasetManifest m;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ManifestEntry e;
        std::getline(ls, e.path, ',');
        std::getline(ls, e.label, ',');
        std::getline(ls, e.source, ',');
        if (first && e.path == "path") {  // header
            first = false;
            continue;
        }
        first = false;
        m.entries.push_back(std::move(e));
    }
    return m;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& csv) {
    std::ofstream f(csv, std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + csv.string() + " for writing");
    f << "path,label,source\n";
    for (const ManifestEntry& e : m.entries)
        f << e.path << "," << e.label << "," << e.source << "\n";
}

SplitResult split(const DatasetManifest& manifest, const SplitRatios& ratios, uint64_t seed) {
    const double sum = ratios.train + ratios.val + ratios.test;
    if (std::fabs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.val < 0 || ratios.test < 0)
        throw Error(ErrorCode::BadRatios, "split ratios must be non-negative and sum to 1");

    // duplicate paths would leak between subsets
    std::set<std::string> seen;
    for (const ManifestEntry& e : manifest.entries)
        if (!seen.insert(e.path).second)
            throw Error(ErrorCode::InvalidArgument, "duplicate path '" + e.path + "'");

    std::map<std::string, std::vector<size_t>> by_class;
    for (size_t i = 0; i < manifest.entries.size(); ++i)
        by_class[manifest.entries[i].label].push_back(i);
    if (by_class.empty()) throw Error(ErrorCode::EmptyClass, "manifest is empty");
    for (const auto& [label, idx] : by_class)
        if (idx.empty()) throw Error(ErrorCode::EmptyClass, "class '" + label + "' is empty");

    // FNV-1a keeps the per-class sub-seeds platform independent
    auto label_hash = [](const std::string& s) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) h = (h ^ static_cast<uint8_t>(c)) * 0x100000001b3ULL;
        return h;
    };

    SplitResult result;
    for (auto& [label, idx] : by_class) {
        // per-class shuffle, seeded per class so label sets are independent
        Rng rng(derive_seed(seed, label_hash(label)));
        for (size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.next_below(i)]);

        const double n = static_cast<double>(idx.size());
        const double exact[3] = {n * ratios.train, n * ratios.val, n * ratios.test};
        size_t take[3];
        double frac[3];
        size_t assigned = 0;
        for (int k = 0; k < 3; ++k) {
            take[k] = static_cast<size_t>(std::floor(exact[k]));
            frac[k] = exact[k] - std::floor(exact[k]);
            assigned += take[k];
        }
        // largest remainder; ties resolved train -> val -> test
        while (assigned < idx.size()) {
            int best = 0;
            for (int k = 1; k < 3; ++k)
                if (frac[k] > frac[best]) best = k;
            take[static_cast<size_t>(best)]++;
            frac[best] = -1.0;
            assigned++;
        }

        size_t pos = 0;
        DatasetManifest* parts[3] = {&result.train, &result.val, &result.test};
        for (int k = 0; k < 3; ++k)
            for (size_t j = 0; j < take[k]; ++j)
                parts[k]->entries.push_back(manifest.entries[idx[pos++]]);
    }
    return result;
}

}  // namespace edgebin
