// finmet: metrizability checks for sprays given as JSON documents.
//
// Exit codes: 0 success, 1 internal error, 2 bad spec or arguments,
// 3 no admissible samples.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "finmet/report.hpp"

namespace {

int emit(const nlohmann::json& report, const std::string& out) {
  const std::string text = finmet::dump(report);
  if (out.empty() || out == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) {
    std::cerr << "finmet: cannot write " << out << "\n";
    return 2;
  }
  f << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Necessary-condition checks for Finsler and Landsberg metrizability of sprays"};
  app.set_version_flag("--version", std::string(finmet::kVersion));
  app.require_subcommand(1);

  std::string spec_path, out, which = "holonomy", point;

  auto* analyze = app.add_subcommand("analyze", "Run the full pipeline and print both verdicts");
  auto* check = app.add_subcommand("check-energy", "Evaluate operator residuals for the given energy");
  auto* dist = app.add_subcommand("distribution", "Saturate one distribution and report it");
  auto* jet = app.add_subcommand("jet", "Assemble the 2-jet system at a point and search for a PD datum");
  for (auto* sub : {analyze, check, dist, jet}) {
    sub->add_option("spec", spec_path, "Spray spec (JSON)")->required();
    sub->add_option("--out,-o", out, "Write the report here instead of stdout");
  }
  dist->add_option("--which", which, "holonomy or landsberg")->check(CLI::IsMember({"holonomy", "landsberg"}));
  jet->add_option("--point", point, "x1,..,xn;y1,..,yn")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const finmet::SpraySpec spec = finmet::load_spec(spec_path);
    if (*analyze) return emit(finmet::analyze_report(spec), out);
    if (*check) return emit(finmet::energy_report(spec), out);
    if (*dist) {
      const auto q = which == "landsberg" ? finmet::Question::landsberg : finmet::Question::finsler;
      return emit(finmet::distribution_report(spec, q), out);
    }
    return emit(finmet::jet_report(spec, finmet::parse_point(point, spec.dim)), out);
  } catch (const finmet::SpecError& e) {
    std::cerr << "finmet: " << e.what() << "\n";
    return 2;
  } catch (const finmet::SamplingExhausted& e) {
    std::cerr << "finmet: sampling exhausted: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "finmet: " << e.what() << "\n";
    return 1;
  }
}
