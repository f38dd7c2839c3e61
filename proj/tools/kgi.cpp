#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kgi/commands.hpp"
#include "kgi/config.hpp"
#include "kgi/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph influence pipeline: ingest, extract, sample-pairs, train, evaluate, report"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::size_t> jobs;
    std::optional<std::uint64_t> seed;
    std::string output;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--output", output, "Output directory (overrides paths.output_dir)");
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    auto* ingest = app.add_subcommand("ingest", "Download subject corpora into the corpus store");
    bool mock = false;
    auto* extract = app.add_subcommand("extract", "Build one knowledge graph per document");
    extract->add_flag("--mock-extractor", mock, "Read triples from sidecar files instead of calling the LLM");
    auto* sample = app.add_subcommand("sample-pairs", "Sample labeled pairs and split train/test");
    bool resume = false;
    auto* train = app.add_subcommand("train", "Contrastive training of the graph encoder");
    train->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");
    kgi::EvaluateOptions eval_options;
    auto* evaluate = app.add_subcommand("evaluate", "Score pairs with every method and write the report");
    evaluate->add_option("--split", eval_options.split, "Pair split to score")->check(CLI::IsMember({"test", "train"}));
    evaluate->add_flag("--allow-train-eval", eval_options.allow_train_eval, "Permit --split train");
    auto* report = app.add_subcommand("report", "Rebuild the report from saved scores");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::stderr_color_mt("kgi"));
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        kgi::RunConfig config = config_path.empty()
                                    ? kgi::parse_run_config("{}", std::filesystem::current_path())
                                    : kgi::load_run_config(config_path);
        if (seed) config.apply_seed(*seed);
        if (jobs) config.apply_jobs(*jobs);
        if (!output.empty()) config.paths.output_dir = std::filesystem::absolute(output).lexically_normal();
        if (mock) config.extraction.mock = true;
        config.validate();

        if (*ingest) return kgi::cmd_ingest(config, std::cout, std::cerr);
        if (*extract) return kgi::cmd_extract(config, std::cout, std::cerr);
        if (*sample) return kgi::cmd_sample_pairs(config, std::cout, std::cerr);
        if (*train) return kgi::cmd_train(config, resume, std::cout, std::cerr);
        if (*evaluate) return kgi::cmd_evaluate(config, eval_options, std::cout, std::cerr);
        if (*report) return kgi::cmd_report(config, std::cout, std::cerr);
    } catch (const kgi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
