#pragma once

// Whole-pipeline runs in a working directory: provider wiring from config,
// a lock so only one run uses a directory, content-addressed stage
// checkpoints and the final record file plus manifest.

#include <cstddef>
#include <filesystem>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seedforge/ablation/builder.hpp"
#include "seedforge/eval/report.hpp"
#include "seedforge/gateway/gateway.hpp"
#include "seedforge/gateway/http.hpp"
#include "seedforge/store/config.hpp"

namespace seedforge {

// Credentials are resolved here, so a missing key variable fails before any
// request. `http` defaults to the real transport.
ProviderSet make_providers(const PipelineConfig& cfg, std::shared_ptr<HttpTransport> http = nullptr);

// Hash of everything besides stage inputs that shapes stage outputs: the
// config (minus budget and eval keys) and the provider ids.
std::string run_fingerprint(const PipelineConfig& cfg, const ProviderSet& providers);

// One JSON file per key under `dir`. Unreadable entries count as misses.
class FileCheckpoints final : public Checkpoints {
public:
    explicit FileCheckpoints(std::filesystem::path dir);
    std::optional<nlohmann::json> load(const std::string& key) override;
    void save(const std::string& key, const nlohmann::json& value) override;

    std::size_t hits() const noexcept { return hits_; }
    std::size_t saves() const noexcept { return saves_; }

private:
    std::filesystem::path dir_;
    std::size_t hits_ = 0;
    std::size_t saves_ = 0;
};

// Exclusive advisory lock on "<dir>/.seedforge.lock", released on
// destruction. Throws PreconditionError if another process holds it.
class WorkdirLock {
public:
    explicit WorkdirLock(const std::filesystem::path& dir);
    ~WorkdirLock();
    WorkdirLock(const WorkdirLock&) = delete;
    WorkdirLock& operator=(const WorkdirLock&) = delete;

private:
    int fd_ = -1;
};

struct RunOptions {
    // Overrides the providers built from config (tests, fault injection).
    std::optional<ProviderSet> providers;
    std::shared_ptr<HttpTransport> http;
    bool checkpoints = true;
    std::string output_name = "dataset.jsonl";
};

struct RunResult {
    DatasetManifest manifest;
    nlohmann::json manifest_json;
    std::filesystem::path records_path;
    std::filesystem::path manifest_path;
    std::string manifest_sha256;
    GatewayStats stats;
    std::size_t checkpoint_hits = 0;
};

// Builds the configured variant in `workdir`. Rerunning after a failure
// reuses every stage that finished, and the output matches an
// uninterrupted run byte for byte when providers are deterministic.
// Stage failures surface as StageError with the cause nested.
RunResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& workdir,
                       const RunOptions& options = {});

// Process exit status for an error: 2 configuration, 3 provider, 4 build
// shortfall, 1 anything else. A StageError is classified by its innermost
// nested cause.
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitShortfall = 4;
int exit_code_for(std::exception_ptr error);

// Evaluation inputs. `refs` rows carry id, task, test_set and reference;
// each prediction file has rows with id and prediction, and names its
// system after the file stem. FormatError with the line number on bad rows.
std::vector<SystemOutputs> read_eval_inputs(const std::filesystem::path& refs,
                                            const std::vector<std::filesystem::path>& predictions);

}  // namespace seedforge
