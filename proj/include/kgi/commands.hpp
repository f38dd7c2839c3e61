#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "kgi/config.hpp"
#include "kgi/features.hpp"

namespace kgi {

// Where each stage reads and writes, derived from the config paths.
struct OutputLayout {
    std::filesystem::path pairs_dir, pairs_csv, train_pairs_csv, test_pairs_csv;
    std::filesystem::path train_dir, checkpoint, loss_csv;
    std::filesystem::path eval_dir, report_dir;

    static OutputLayout from(const RunConfig& config);
};

// The configured embedding provider behind a memoizing cache. The disk cache
// file name carries a hash of the provider description.
class ProviderStack {
public:
    explicit ProviderStack(const RunConfig& config);
    ~ProviderStack();

    EmbeddingProvider& provider() { return *cached_; }
    void flush() { cached_->flush(); }

private:
    std::unique_ptr<EmbeddingProvider> base_;
    std::unique_ptr<CachedEmbeddingProvider> cached_;
};

struct EvaluateOptions {
    std::string split = "test";  // test | train
    bool allow_train_eval = false;
};

// Each command returns the process exit code. Progress goes to `out`,
// per-item failures to `err`; configuration and missing-artifact errors are
// thrown.
int cmd_ingest(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sample_pairs(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_train(const RunConfig& config, bool resume, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace kgi
