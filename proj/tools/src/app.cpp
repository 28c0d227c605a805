#include "nnipls_app/app.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>

#include "context.hpp"
#include "nnipls/errors.hpp"

namespace nnipls::app {

namespace {

const std::set<std::string> kGlobalKeys{"seed", "threads", "output_dir"};

struct Failure {
  int code;
  std::string category;
};

Failure classify(const Error& e) {
  switch (e.category()) {
    case Error::Category::kNumeric: return {kNumeric, "numeric"};
    case Error::Category::kIo: return {kIo, "io"};
    case Error::Category::kConfig:
    case Error::Category::kInvalidArgument: break;
  }
  return {kConfig, "config"};
}

void report_error(const std::string& category, const std::string& message) {
  const nlohmann::ordered_json j{{"error", {{"category", category}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
}

void write_manifest(Context& ctx) {
  try {
    std::filesystem::create_directories(ctx.out_dir);
    std::ofstream out(ctx.out_dir / "manifest.json");
    out << ctx.manifest.to_json() << '\n';
  } catch (const std::exception& e) {
    report_error("io", std::string("cannot write manifest: ") + e.what());
  }
}

}  // namespace

std::string default_output_dir() {
  if (const char* env = std::getenv("NNIPLS_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "nnipls_out";
}

void Context::write(const std::string& name, const std::string& content) {
  manifest.artifacts.push_back(write_artifact(out_dir, name, content));
}

std::string Context::input_path(const std::string& key) const {
  const auto v = kv.get_string(key);
  if (!v || v->empty()) throw ConfigError("missing required input '" + key + "'");
  if (!std::filesystem::is_regular_file(*v)) throw IoError("input '" + key + "' not found: " + *v);
  return *v;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

int run(const std::vector<std::string>& args_in) {
  CLI::App cli{"Loss-landscape analysis of neural interatomic potentials", "nnipls"};
  cli.require_subcommand(1);

  struct Options {
    std::string config;
    std::vector<std::string> sets;
    std::string output_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::map<std::string, std::string> paths;
  };
  Options opt;
  std::map<std::string, const Command*> by_name;

  for (const auto& cmd : commands()) {
    auto* sub = cli.add_subcommand(cmd.name, cmd.help);
    by_name[cmd.name] = &cmd;
    sub->add_option("-c,--config", opt.config, "key = value configuration file");
    sub->add_option("--set", opt.sets, "override a configuration key (key=value); repeatable");
    sub->add_option("-o,--output-dir", opt.output_dir, "artifact directory (default $NNIPLS_OUTPUT_DIR or nnipls_out)");
    sub->add_option("--seed", opt.seed, "global seed");
    sub->add_option("--threads", opt.threads, "worker cap (0 = all cores)");
    for (const auto& p : cmd.paths) sub->add_option(p.flag, opt.paths[p.key], p.help);
  }

  std::vector<std::string> args(args_in.rbegin(), args_in.rend());
  try {
    cli.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("config", e.what());
    return kConfig;
  }

  const Command* cmd = nullptr;
  CLI::App* sub = nullptr;
  for (auto* s : cli.get_subcommands()) {
    sub = s;
    cmd = by_name.at(s->get_name());
  }

  Context ctx;
  ctx.command = cmd->name;
  ctx.manifest.command = cmd->name;
  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    try {
      // Precedence: built-in defaults < config file < --set < dedicated flags.
      if (!opt.config.empty()) ctx.kv = KvConfig::from_file(opt.config);
      for (const auto& s : opt.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
        ctx.kv.set(s.substr(0, eq), s.substr(eq + 1));
      }
      if (sub->count("--seed")) ctx.kv.set("seed", std::to_string(opt.seed));
      if (sub->count("--threads")) ctx.kv.set("threads", std::to_string(opt.threads));
      if (sub->count("--output-dir")) ctx.kv.set("output_dir", opt.output_dir);
      for (const auto& p : cmd->paths)
        if (sub->count(p.flag)) ctx.kv.set(p.key, opt.paths[p.key]);

      auto known = kGlobalKeys;
      known.insert(cmd->keys.begin(), cmd->keys.end());
      for (const auto& p : cmd->paths) known.insert(p.key);
      ctx.out_dir = ctx.kv.string_or("output_dir", default_output_dir());
      ctx.kv.check_known(known);
      ctx.seed = ctx.kv.uint_or("seed", 0);
      ctx.threads = static_cast<unsigned>(ctx.kv.uint_or("threads", 0));
      ctx.manifest.config = ctx.kv.entries();
      ctx.manifest.seed = ctx.seed;
      ctx.manifest.threads = ctx.threads;
      std::filesystem::create_directories(ctx.out_dir);
    } catch (const std::filesystem::filesystem_error& e) {
      throw IoError(e.what());
    }
    cmd->run(ctx);
  } catch (const Error& e) {
    const auto f = classify(e);
    code = f.code;
    ctx.manifest.error_category = f.category;
    ctx.manifest.error_message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    code = kIo;
    ctx.manifest.error_category = "io";
    ctx.manifest.error_message = e.what();
  } catch (const std::exception& e) {
    code = kFailure;
    ctx.manifest.error_category = "internal";
    ctx.manifest.error_message = e.what();
  }
  if (ctx.out_dir.empty()) ctx.out_dir = default_output_dir();
  ctx.manifest.exit_code = code;
  ctx.manifest.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (code != kOk) report_error(ctx.manifest.error_category, ctx.manifest.error_message);
  write_manifest(ctx);
  return code;
}

}  // namespace nnipls::app
