#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ufe/golden.hpp"
#include "ufe/report.hpp"

namespace {

int emit(const ufe::cli::AnalysisReport& report, const ufe::cli::RunConfig& cfg) {
    std::string payload = cfg.format == ufe::cli::Format::Json
                              ? ufe::cli::to_json(report).dump(2) + "\n"
                              : ufe::cli::to_text(report);
    if (cfg.output_path.empty()) {
        std::cout << payload;
        return 0;
    }
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) {
        std::cerr << "error [stage output]: cannot write '" << cfg.output_path << "'\n";
        return 1;
    }
    out << payload;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uncertain fixed-effects analysis for single- and two-factor designs"};
    app.require_subcommand(1);

    ufe::cli::RunConfig cfg;
    std::string design_name = "single", objective_name = "none", format_name = "text";

    auto* analyze = app.add_subcommand("analyze", "Analyze a CSV dataset");
    analyze->add_option("--input", cfg.input_path, "CSV file (level_a[,level_b],value)")
        ->required();
    analyze->add_option("--design", design_name, "single|two")
        ->check(CLI::IsMember({"single", "two"}));
    analyze->add_flag("--interaction", cfg.interaction, "Fit the interaction model (two-factor)");
    analyze->add_option("--alpha", cfg.alpha, "Significance / CI level (default 0.05)")
        ->check(CLI::Range(1e-6, 1.0 - 1e-6));
    analyze->add_option("--objective", objective_name, "none|larger|smaller")
        ->check(CLI::IsMember({"none", "larger", "smaller"}));
    analyze->add_option("--format", format_name, "text|json")
        ->check(CLI::IsMember({"text", "json"}));
    analyze->add_option("--output", cfg.output_path, "Write the report here instead of stdout");

    std::string golden_name;
    int corrupt_index = -1;
    auto* golden = app.add_subcommand("golden", "Replay an embedded reference dataset");
    golden->add_option("name", golden_name, "example1|example2|example3")
        ->required()
        ->check(CLI::IsMember(ufe::cli::golden_names()));
    golden
        ->add_option("--corrupt-index", corrupt_index,
                     "Perturb the k-th embedded expected value by 0.01 (comparator self-check)")
        ->group("");  // hidden

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) {
        cfg.design = design_name == "two" ? ufe::design::DesignKind::Two
                                          : ufe::design::DesignKind::Single;
        cfg.objective = objective_name == "larger"    ? ufe::cli::Objective::Larger
                        : objective_name == "smaller" ? ufe::cli::Objective::Smaller
                                                      : ufe::cli::Objective::None;
        cfg.format = format_name == "json" ? ufe::cli::Format::Json : ufe::cli::Format::Text;
        try {
            const auto out = ufe::cli::run_file(cfg);
            const int emit_rc = emit(out.report, cfg);
            if (emit_rc != 0) return emit_rc;
            if (out.exit_code != 0)
                std::cerr << "error [stage " << out.report.failed_stage
                          << "]: " << out.report.message << "\n";
            return out.exit_code;
        } catch (const ufe::Error& e) {
            std::cerr << "error [stage parse]: " << e.what() << "\n";
            return 1;
        }
    }

    const auto res = ufe::cli::run_golden(golden_name, ufe::cli::golden_tolerance(),
                                          corrupt_index);
    if (res.pass) {
        std::cout << res.name << ": all embedded expectations matched\n";
        return 0;
    }
    std::cout << res.name << ": " << res.diffs.size() << " mismatch(es)\n";
    for (const auto& d : res.diffs) std::cout << "  " << d << "\n";
    return 1;
}
