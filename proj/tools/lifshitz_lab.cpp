#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "lifshitz/cli.hpp"

namespace cli = lifshitz::cli;

namespace {

std::string flag_name(const std::string& key) {
  std::string dashed = key;
  for (auto& ch : dashed)
    if (ch == '_') ch = '-';
  return dashed == key ? "--" + key : "--" + dashed + ",--" + key;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_file;
  std::string out_dir;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifshitz-tail localization laboratory"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Subcommand>> subs;
  for (const auto& schema : cli::command_schemas()) {
    auto s = std::make_unique<Subcommand>();
    s->app = app.add_subcommand(schema.name, schema.summary);
    s->app->add_option("--config", s->config_file, "key = value file");
    s->app->add_option("--out", s->out_dir, "output directory (default $LIFSHITZ_OUTPUT_DIR or ./lifshitz_out)");
    s->app->add_option("--set", s->sets, "key=value override, repeatable");
    for (const auto& k : schema.keys) {
      std::string help = k.help + " [" + k.fallback + "]";
      if (k.kind == cli::ValueKind::Flag)
        s->options[k.name] = s->app->add_flag(flag_name(k.name), s->flags[k.name], help);
      else
        s->options[k.name] = s->app->add_option(flag_name(k.name), s->values[k.name], help);
    }
    subs.push_back(std::move(s));
  }

  std::string manifest, replay_out;
  CLI::App* replay = app.add_subcommand("replay", "re-run a recorded manifest");
  replay->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
  replay->add_option("--out", replay_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  try {
    if (replay->parsed()) {
      auto r = cli::replay(manifest, cli::output_directory(replay_out), std::cerr);
      return r.exit_code;
    }
    for (auto& s : subs) {
      if (!s->app->parsed()) continue;
      std::map<std::string, std::string> file_values;
      if (!s->config_file.empty()) {
        std::ifstream in(s->config_file);
        if (!in) throw cli::ConfigError("cannot read config file " + s->config_file);
        file_values = cli::parse_key_values(in, s->config_file);
      }
      std::map<std::string, std::string> overrides;
      for (const auto& kv : s->sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw cli::ConfigError("--set expects key=value, got '" + kv + "'");
        overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      for (const auto& [key, opt] : s->options) {
        if (opt->count() == 0) continue;
        auto f = s->flags.find(key);
        overrides[key] = f != s->flags.end() ? (f->second ? "true" : "false") : s->values[key];
      }
      cli::Config cfg = cli::resolve_config(s->app->get_name(), file_values, overrides);
      auto dir = cli::output_directory(s->out_dir);
      auto r = cli::run(cfg, dir, std::cerr);
      if (r.exit_code == cli::kOk) std::cout << (dir / "manifest.json").string() << "\n";
      return r.exit_code;
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kConfigError;
  }
  return cli::kConfigError;
}
