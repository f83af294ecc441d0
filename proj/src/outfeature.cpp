#include "clonefuse/outfeature.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

using nlohmann::json;

namespace clonefuse {

namespace {

constexpr size_t kStdoutCap = 1 << 20;  // 1 MiB

std::string substitute_file(const std::string& tmpl, const std::string& file) {
    const std::string needle = "{file}";
    std::string out;
    size_t pos = 0;
    while (true) {
        size_t hit = tmpl.find(needle, pos);
        if (hit == std::string::npos) {
            out += tmpl.substr(pos);
            return out;
        }
        out += tmpl.substr(pos, hit - pos);
        out += file;
        pos = hit + needle.size();
    }
}

ExecutionResult run_subprocess(const std::string& command, double timeout_sec) {
    ExecutionResult result;
    const auto start = std::chrono::steady_clock::now();

    int pipefd[2];
    if (pipe(pipefd) != 0) throw std::runtime_error("pipe() failed");

    pid_t pid = fork();
    if (pid < 0) {
        close(pipefd[0]);
        close(pipefd[1]);
        throw std::runtime_error("fork() failed");
    }
    if (pid == 0) {
        // Child: own process group so a timeout kill reaps grandchildren too.
        setpgid(0, 0);
        dup2(pipefd[1], STDOUT_FILENO);
        close(pipefd[0]);
        close(pipefd[1]);
        int devnull = open("/dev/null", O_RDWR);
        if (devnull >= 0) {
            dup2(devnull, STDIN_FILENO);
            dup2(devnull, STDERR_FILENO);
            close(devnull);
        }
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(pipefd[1]);
    const auto deadline = start + std::chrono::duration<double>(timeout_sec);
    bool timed_out = false;
    std::string captured;
    char buf[4096];

    while (true) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            timed_out = true;
            break;
        }
        int remaining_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
        struct pollfd pfd{pipefd[0], POLLIN, 0};
        int rc = poll(&pfd, 1, std::max(1, remaining_ms));
        if (rc == 0) {
            timed_out = true;
            break;
        }
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        ssize_t got = read(pipefd[0], buf, sizeof buf);
        if (got <= 0) break;  // EOF: child closed stdout
        if (captured.size() < kStdoutCap)
            captured.append(buf, buf + std::min<size_t>(got, kStdoutCap - captured.size()));
    }
    close(pipefd[0]);

    int wstatus = 0;
    if (timed_out) {
        kill(-pid, SIGKILL);
        waitpid(pid, &wstatus, 0);
        result.status = ExecStatus::timeout;
        result.stdout_text.clear();
    } else {
        waitpid(pid, &wstatus, 0);
        bool ok = WIFEXITED(wstatus) && WEXITSTATUS(wstatus) == 0;
        result.status = ok ? ExecStatus::ok : ExecStatus::runtime_error;
        result.stdout_text = std::move(captured);
    }
    result.duration_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace

const char* exec_status_name(ExecStatus status) {
    switch (status) {
        case ExecStatus::ok: return "ok";
        case ExecStatus::compile_error: return "compile_error";
        case ExecStatus::runtime_error: return "runtime_error";
        case ExecStatus::timeout: return "timeout";
    }
    return "runtime_error";
}

ExecStatus exec_status_from_name(const std::string& name) {
    if (name == "ok") return ExecStatus::ok;
    if (name == "compile_error") return ExecStatus::compile_error;
    if (name == "runtime_error") return ExecStatus::runtime_error;
    if (name == "timeout") return ExecStatus::timeout;
    throw std::runtime_error("unknown execution status: " + name);
}

void ExecutorConfig::validate() const {
    if (timeout_sec <= 0) throw std::runtime_error("executor timeout must be positive");
    if (mode == ExecutorMode::subprocess &&
        command_template.find("{file}") == std::string::npos)
        throw std::runtime_error("subprocess command template must contain {file}");
    if (feature_dim < 1) throw std::runtime_error("feature_dim must be at least 1");
    if (fallback_value < 0.0 || fallback_value > 1.0)
        throw std::runtime_error("fallback_value must lie in [0,1]");
}

ExecutionResult execute_fragment(const CodeFragment& fragment, const ExecutorConfig& cfg) {
    cfg.validate();

    if (cfg.mode == ExecutorMode::scripted) {
        ExecutionResult result;
        auto it = cfg.fixtures.find(fragment.id);
        if (it == cfg.fixtures.end()) {
            result.status = ExecStatus::runtime_error;
            return result;
        }
        result.status = it->second.status;
        if (result.status == ExecStatus::ok || result.status == ExecStatus::runtime_error)
            result.stdout_text = it->second.stdout_text;
        return result;
    }

    return run_subprocess(substitute_file(cfg.command_template, fragment.path),
                          cfg.timeout_sec);
}

double output_similarity(const std::string& out_a, const std::string& out_b) {
    auto terms = [](const std::string& text) {
        std::unordered_map<std::string, double> tf;
        std::string word;
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!word.empty()) {
                    ++tf[word];
                    word.clear();
                }
            } else {
                word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
        }
        if (!word.empty()) ++tf[word];
        return tf;
    };

    auto tf_a = terms(out_a);
    auto tf_b = terms(out_b);
    if (tf_a.empty() && tf_b.empty()) return 1.0;
    if (tf_a.empty() || tf_b.empty()) return 0.0;

    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (const auto& [term, count] : tf_a) {
        norm_a += count * count;
        auto it = tf_b.find(term);
        if (it != tf_b.end()) dot += count * it->second;
    }
    for (const auto& [term, count] : tf_b) norm_b += count * count;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

OutputFeature compute_pair_feature(const PairExample& pair, const CorpusManifest& manifest,
                                   const ExecutorConfig& cfg, const SimilarityScorer& scorer) {
    const CodeFragment& a = manifest.fragment(pair.id_a);
    const CodeFragment& b = manifest.fragment(pair.id_b);

    ExecutionResult ra = execute_fragment(a, cfg);
    ExecutionResult rb = execute_fragment(b, cfg);

    OutputFeature feature;
    feature.value.assign(cfg.feature_dim, cfg.fallback_value);
    if (ra.status == ExecStatus::ok && rb.status == ExecStatus::ok) {
        feature.value[0] = scorer(ra.stdout_text, rb.stdout_text);
        feature.available = true;
    }
    return feature;
}

std::string pair_key(const PairExample& pair) { return pair.id_a + "|" + pair.id_b; }

FeatureMap compute_all_features(const CorpusManifest& manifest, const ExecutorConfig& cfg) {
    FeatureMap features;
    for (const auto& pair : manifest.pairs)
        features[pair_key(pair)] = compute_pair_feature(pair, manifest, cfg);
    return features;
}

void attach_features(CorpusManifest& manifest, const FeatureMap& features,
                     const ExecutorConfig& cfg) {
    for (auto& pair : manifest.pairs) {
        auto it = features.find(pair_key(pair));
        if (it == features.end()) {
            pair.out_feature.assign(cfg.feature_dim, cfg.fallback_value);
            pair.feature_available = false;
        } else {
            pair.out_feature = it->second.value;
            pair.feature_available = it->second.available;
        }
    }
}

std::string features_to_json(const FeatureMap& features) {
    json doc = json::object();
    for (const auto& [key, feature] : features)
        doc[key] = json{{"value", feature.value}, {"available", feature.available}};
    return doc.dump(2);
}

FeatureMap features_from_json(const std::string& text) {
    FeatureMap features;
    json doc = json::parse(text);
    for (const auto& [key, j] : doc.items()) {
        OutputFeature f;
        f.value = j.at("value").get<std::vector<double>>();
        f.available = j.at("available").get<bool>();
        features.emplace(key, std::move(f));
    }
    return features;
}

void save_features(const FeatureMap& features, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write features: " + path.string());
    out << features_to_json(features) << "\n";
}

FeatureMap load_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read features: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return features_from_json(buf.str());
}

}  // namespace clonefuse
