#include "clonefuse/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "clonefuse/lexer.hpp"
#include "clonefuse/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace clonefuse {

namespace {

constexpr int kManifestSchemaVersion = 1;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IngestError("cannot read file: " + path.string());
    return buf.str();
}

std::string normalize_key(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::replace(name.begin(), name.end(), '_', '-');
    return name;
}

// Relative path with '/' separators regardless of platform.
std::string rel_id(const fs::path& file, const fs::path& root) {
    return fs::relative(file, root).generic_string();
}

void collect_files(const fs::path& dir, std::vector<fs::path>& out) {
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename().string().starts_with(".")) continue;
        out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
}

}  // namespace

const char* fragment_kind_name(FragmentKind kind) {
    switch (kind) {
        case FragmentKind::original: return "original";
        case FragmentKind::plagiarized: return "plagiarized";
        case FragmentKind::non_plagiarized: return "non_plagiarized";
    }
    return "original";
}

FragmentKind fragment_kind_from_name(const std::string& name) {
    if (name == "original") return FragmentKind::original;
    if (name == "plagiarized") return FragmentKind::plagiarized;
    if (name == "non_plagiarized") return FragmentKind::non_plagiarized;
    throw std::runtime_error("unknown fragment kind: " + name);
}

const CodeFragment& CorpusManifest::fragment(const std::string& id) const {
    for (const auto& f : fragments) {
        if (f.id == id) return f;
    }
    throw std::runtime_error("unknown fragment id: " + id);
}

bool CorpusManifest::has_fragment(const std::string& id) const {
    return std::any_of(fragments.begin(), fragments.end(),
                       [&](const CodeFragment& f) { return f.id == id; });
}

void SplitSpec::validate() const {
    if (train_frac <= 0 || val_frac <= 0 || test_frac <= 0)
        throw std::runtime_error("split fractions must be positive");
    double sum = train_frac + val_frac + test_frac;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::runtime_error("split fractions must sum to 1, got " + std::to_string(sum));
}

CorpusManifest ingest_irplag(const fs::path& root) {
    if (!fs::exists(root)) throw IngestError("dataset root does not exist: " + root.string());
    if (!fs::is_directory(root)) throw IngestError("dataset root is not a directory: " + root.string());

    std::vector<fs::path> task_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) task_dirs.push_back(entry.path());
    }
    std::sort(task_dirs.begin(), task_dirs.end());
    if (task_dirs.empty()) throw IngestError("no task folders under dataset root: " + root.string());

    CorpusManifest manifest;
    std::unordered_set<std::string> seen_ids;

    for (const auto& task_dir : task_dirs) {
        const std::string task = task_dir.filename().string();

        std::vector<fs::path> originals, plagiarized, non_plagiarized;
        for (const auto& entry : fs::directory_iterator(task_dir)) {
            if (!entry.is_directory()) continue;
            std::string key = normalize_key(entry.path().filename().string());
            if (key == "original") {
                collect_files(entry.path(), originals);
            } else if (key == "plagiarized") {
                collect_files(entry.path(), plagiarized);
            } else if (key == "non-plagiarized") {
                collect_files(entry.path(), non_plagiarized);
            }
        }

        if (originals.empty())
            throw IngestError("task folder has no original file: " + task_dir.string());

        auto add_fragment = [&](const fs::path& file, FragmentKind kind) {
            CodeFragment frag;
            frag.id = rel_id(file, root);
            frag.path = file.string();
            frag.source = read_file(file);
            frag.task = task;
            frag.kind = kind;
            if (frag.source.empty()) throw IngestError("empty source file: " + file.string());
            if (!seen_ids.insert(frag.id).second)
                throw IngestError("duplicate fragment id: " + frag.id);
            manifest.fragments.push_back(std::move(frag));
            return manifest.fragments.back().id;
        };

        std::vector<std::string> original_ids;
        for (const auto& f : originals) original_ids.push_back(add_fragment(f, FragmentKind::original));

        auto add_variants = [&](const std::vector<fs::path>& files, FragmentKind kind, int label) {
            for (const auto& f : files) {
                std::string vid = add_fragment(f, kind);
                for (const auto& oid : original_ids) {
                    PairExample pair;
                    pair.id_a = oid;
                    pair.id_b = vid;
                    pair.label = label;
                    manifest.pairs.push_back(std::move(pair));
                }
            }
        };
        add_variants(plagiarized, FragmentKind::plagiarized, 1);
        add_variants(non_plagiarized, FragmentKind::non_plagiarized, 0);
    }

    manifest.stats = corpus_stats(manifest);
    return manifest;
}

CorpusManifest ingest_pairs_csv(const fs::path& csv_path) {
    if (!fs::exists(csv_path)) throw IngestError("pairs csv does not exist: " + csv_path.string());
    std::ifstream in(csv_path);
    if (!in) throw IngestError("cannot read file: " + csv_path.string());

    CorpusManifest manifest;
    std::unordered_set<std::string> seen_ids;
    const fs::path base = csv_path.parent_path();

    auto ensure_fragment = [&](const std::string& raw_path, FragmentKind kind) {
        fs::path p(raw_path);
        if (p.is_relative()) p = base / p;
        std::string id = fs::path(raw_path).generic_string();
        if (seen_ids.insert(id).second) {
            CodeFragment frag;
            frag.id = id;
            frag.path = p.string();
            frag.source = read_file(p);
            frag.task = "pairs";
            frag.kind = kind;
            if (frag.source.empty()) throw IngestError("empty source file: " + p.string());
            manifest.fragments.push_back(std::move(frag));
        }
        return id;
    };

    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::istringstream row(line);
        std::string path_a, path_b, label_str;
        if (!std::getline(row, path_a, ',') || !std::getline(row, path_b, ',') ||
            !std::getline(row, label_str, ','))
            throw IngestError("malformed csv row " + std::to_string(lineno) + " in " +
                              csv_path.string());
        if (lineno == 1 && label_str != "0" && label_str != "1") continue;  // header
        if (label_str != "0" && label_str != "1")
            throw IngestError("label must be 0 or 1 at csv row " + std::to_string(lineno));

        int label = label_str == "1" ? 1 : 0;
        PairExample pair;
        pair.id_a = ensure_fragment(path_a, FragmentKind::original);
        pair.id_b = ensure_fragment(
            path_b, label == 1 ? FragmentKind::plagiarized : FragmentKind::non_plagiarized);
        pair.label = label;
        manifest.pairs.push_back(std::move(pair));
    }
    if (manifest.pairs.empty()) throw IngestError("no pairs in csv: " + csv_path.string());

    manifest.stats = corpus_stats(manifest);
    return manifest;
}

SplitResult split_dataset(const CorpusManifest& manifest, const SplitSpec& spec) {
    spec.validate();
    const size_t n = manifest.pairs.size();
    if (n < 3) throw std::runtime_error("need at least 3 pairs to split, got " + std::to_string(n));

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(spec.seed);
    rng.shuffle(order);

    const size_t n_train = static_cast<size_t>(spec.train_frac * static_cast<double>(n));
    const size_t n_val = static_cast<size_t>(spec.val_frac * static_cast<double>(n));

    SplitResult result;
    for (size_t i = 0; i < n; ++i) {
        const PairExample& p = manifest.pairs[order[i]];
        if (i < n_train)
            result.train.push_back(p);
        else if (i < n_train + n_val)
            result.val.push_back(p);
        else
            result.test.push_back(p);
    }
    return result;
}

CorpusStats corpus_stats(const CorpusManifest& manifest) {
    CorpusStats stats;
    std::unordered_set<std::string> unique;
    bool first = true;

    for (const auto& frag : manifest.fragments) {
        TokenSequence tokens;
        try {
            tokens = lex(frag.source);
        } catch (const LexError& e) {
            throw std::runtime_error("lexing failed for " + frag.id + ": " + e.what());
        }
        stats.total_tokens += tokens.size();
        for (const auto& t : tokens) unique.insert(t.text);
        if (first || tokens.size() < stats.min_tokens) stats.min_tokens = tokens.size();
        if (first || tokens.size() > stats.max_tokens) stats.max_tokens = tokens.size();
        first = false;
    }
    stats.unique_tokens = unique.size();
    stats.avg_tokens = manifest.fragments.empty()
                           ? 0.0
                           : static_cast<double>(stats.total_tokens) /
                                 static_cast<double>(manifest.fragments.size());
    return stats;
}

namespace {

json stats_to_json(const CorpusStats& s) {
    return json{{"total_tokens", s.total_tokens},
                {"unique_tokens", s.unique_tokens},
                {"min_tokens", s.min_tokens},
                {"max_tokens", s.max_tokens},
                {"avg_tokens", s.avg_tokens}};
}

CorpusStats stats_from_json(const json& j) {
    CorpusStats s;
    s.total_tokens = j.at("total_tokens").get<size_t>();
    s.unique_tokens = j.at("unique_tokens").get<size_t>();
    s.min_tokens = j.at("min_tokens").get<size_t>();
    s.max_tokens = j.at("max_tokens").get<size_t>();
    s.avg_tokens = j.at("avg_tokens").get<double>();
    return s;
}

}  // namespace

std::string manifest_to_json(const CorpusManifest& manifest) {
    json fragments = json::array();
    for (const auto& f : manifest.fragments) {
        fragments.push_back({{"id", f.id},
                             {"path", f.path},
                             {"source", f.source},
                             {"task", f.task},
                             {"kind", fragment_kind_name(f.kind)}});
    }
    json pairs = json::array();
    for (const auto& p : manifest.pairs) {
        pairs.push_back({{"id_a", p.id_a},
                         {"id_b", p.id_b},
                         {"label", p.label},
                         {"out_feature", p.out_feature},
                         {"feature_available", p.feature_available}});
    }
    json doc{{"schema_version", kManifestSchemaVersion},
             {"fragments", std::move(fragments)},
             {"pairs", std::move(pairs)},
             {"stats", stats_to_json(manifest.stats)}};
    return doc.dump(2);
}

CorpusManifest manifest_from_json(const std::string& text) {
    json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != kManifestSchemaVersion)
        throw std::runtime_error("unsupported manifest schema version");

    CorpusManifest manifest;
    for (const auto& j : doc.at("fragments")) {
        CodeFragment f;
        f.id = j.at("id").get<std::string>();
        f.path = j.at("path").get<std::string>();
        f.source = j.at("source").get<std::string>();
        f.task = j.at("task").get<std::string>();
        f.kind = fragment_kind_from_name(j.at("kind").get<std::string>());
        manifest.fragments.push_back(std::move(f));
    }
    std::unordered_set<std::string> ids;
    for (const auto& f : manifest.fragments) ids.insert(f.id);
    for (const auto& j : doc.at("pairs")) {
        PairExample p;
        p.id_a = j.at("id_a").get<std::string>();
        p.id_b = j.at("id_b").get<std::string>();
        p.label = j.at("label").get<int>();
        p.out_feature = j.at("out_feature").get<std::vector<double>>();
        p.feature_available = j.at("feature_available").get<bool>();
        if (!ids.count(p.id_a) || !ids.count(p.id_b))
            throw std::runtime_error("pair references unknown fragment: " + p.id_a + " / " + p.id_b);
        manifest.pairs.push_back(std::move(p));
    }
    manifest.stats = stats_from_json(doc.at("stats"));
    return manifest;
}

void save_manifest(const CorpusManifest& manifest, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << manifest_to_json(manifest) << "\n";
}

CorpusManifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read manifest: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str());
}

}  // namespace clonefuse
