#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "photonstat/pipeline.hpp"

namespace {

using photonstat::cli::Options;

struct Help {
  const char* name;
  const char* text;
};

constexpr Help kCommands[] = {
    {"simulate", "generate a PTS1 event file from the classical or quantum source"},
    {"route", "split one stream over the three detectors (D1 gate, D2 start, D3 stop)"},
    {"tac", "gated start-stop acquisition of a routed file, normalized g3 slice CSV"},
    {"g2", "autocorrelation g2(tau) CSV"},
    {"xg2", "cross-correlation g2 between two channels"},
    {"g3map", "triple-coincidence map, or a fit-ready slice with --delta"},
    {"spectrum", "harmonic content of a correlogram CSV"},
    {"visibility", "oscillation contrast of a correlogram CSV"},
    {"fit", "fit g2 harmonics, or the delay of a g3 slice (--model eq5|eq8|both)"},
    {"discriminate", "fit a g3 slice with both delay models and compare residuals"},
    {"sweep-pump", "oscillation period versus normalized pump, inverse square root fit"},
    {"demo", "quantum source through the whole chain into an output directory"},
};

void common(CLI::App* sub, Options& o, std::uint64_t& seed) {
  sub->add_option("--config", o.config_path, "TOML-style run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", seed, "master seed, overrides run.seed");
  sub->add_option("--out", o.out, "output file (directory for demo)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photon statistics simulator and correlator"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : kCommands) {
    auto* sub = app.add_subcommand(c.name, c.text);
    common(sub, o, seed);
    subs[c.name] = sub;
  }
  const std::string needs_input[] = {"route", "tac", "g2", "xg2", "g3map", "spectrum", "visibility", "fit", "discriminate"};
  for (const auto& name : needs_input) subs[name]->add_option("--in", o.in, "input file")->required();

  subs["simulate"]->add_option("--model", o.model, "classical or quantum")->check(CLI::IsMember({"classical", "quantum"}));
  subs["simulate"]->add_option("--duration", o.duration, "ns, overrides run.duration");
  for (const auto& name : {"route", "g2", "xg2", "g3map"}) {
    subs[name]->add_option("--channels", o.channels, "channels merged into the analysed stream")->delimiter(',');
  }
  subs["xg2"]->add_option("--channel-b", o.channel_b, "second channel");
  subs["tac"]->add_option("--delta", o.delta, "gate delay, ns (default detection.delay_delta)");

  auto* g3 = subs["g3map"];
  g3->alias("g3");
  g3->add_option("--roles", o.roles, "channels for t1,t2,t3")->delimiter(',');
  g3->add_option("--delta", o.delta, "write the conditional slice at this delay, ns");
  g3->add_option("--delta-lo", o.delta_lo, "first delay row edge, ns");
  g3->add_option("--delta-bin", o.delta_bin, "delay row width, ns (default detection.gate_width)");
  g3->add_option("--n-delta", o.n_delta, "number of delay rows");
  g3->add_option("--tau-bin", o.tau_bin, "ns (default acquisition.bin)");
  g3->add_option("--tau-max", o.tau_max, "ns (default acquisition.max_lag)");

  subs["spectrum"]->add_option("--harmonics", o.harmonics, "harmonics to report");
  subs["visibility"]->add_option("--window-lo", o.window_lo, "ns");
  subs["visibility"]->add_option("--window-hi", o.window_hi, "ns");

  auto* fit = subs["fit"];
  std::string fit_model = "g2";
  fit->add_option("--model", fit_model, "g2, eq5, eq8 or both")->check(CLI::IsMember({"g2", "eq5", "eq8", "both"}));
  auto* both = fit->add_flag("--both", "same as --model both");
  fit->add_option("--harmonics", o.harmonics, "harmonics in the g2 model");
  for (auto* sub : {fit, subs["discriminate"]}) {
    sub->add_option("--g2-params", o.g2_params, "g2 fit report used by the g3 models");
    sub->add_option("--delta-max", o.delta_max, "upper end of the delay scan, ns");
  }

  auto* sweep = subs["sweep-pump"];
  sweep->add_option("--pump", o.pump, "normalized pump values")->delimiter(',');
  sweep->add_option("--mapping", o.mapping, "coupling or drive")->check(CLI::IsMember({"coupling", "drive"}));
  sweep->add_option("--j0", o.j0, "pump offset");
  sweep->add_flag("--fit-j0", o.fit_j0, "fit the offset too");

  auto* demo = subs["demo"];
  demo->add_option("--duration", o.duration, "ns, overrides run.duration");
  demo->add_option("--delta", o.delta, "slice delay, ns");
  demo->add_option("--harmonics", o.harmonics, "harmonics in the g2 model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : photonstat::cli::ValidationFailure;
  }
  if (seed != 0 || app.get_subcommands().front()->count("--seed") > 0) o.seed = seed;
  const std::string cmd = app.get_subcommands().front()->get_name();
  if (cmd == "fit") o.model = both->count() > 0 ? "both" : fit_model;
  return photonstat::cli::run_pipeline(cmd, o, std::cout, &std::cerr);
}
