// Copyright 2026 The Riderscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// riderscope: batch differential analysis of repackaged app corpora.
//
// The store is a plain directory of JSON/JSONL/CSV files; every stage reads
// its inputs from one store and writes its outputs to another (usually the
// same one). `riderscope run` chains all stages over a single store.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "riderscope/pipeline.hpp"
#include "riderscope/synth.hpp"

namespace {

using namespace riderscope;

std::string default_store() {
  const char* env = std::getenv("RIDERSCOPE_STORE");
  return env != nullptr ? env : "riderscope-store";
}

void dump_module(const dex::DexModule& mod, const std::string& origin) {
  std::cout << "# " << origin << ": " << mod.classes().size() << " classes, "
            << mod.methods().size() << " method refs\n";
  for (const dex::ClassDef& cls : mod.classes()) {
    std::cout << "class " << mod.class_dotted_name(cls.class_type_idx) << "\n";
    auto dump_method = [&](const dex::EncodedMethod& m, const char* kind) {
      std::cout << "  " << kind << " " << mod.method_signature(m.method_idx);
      if (!m.body) {
        std::cout << " (no code)\n";
        return;
      }
      std::cout << " (" << m.body->instructions.size() << " instructions)\n";
      for (std::uint32_t idx : m.body->invoked_methods) {
        std::cout << "    invokes " << mod.method_signature(idx) << "\n";
      }
    };
    for (const dex::EncodedMethod& m : cls.direct_methods) dump_method(m, "direct");
    for (const dex::EncodedMethod& m : cls.virtual_methods) dump_method(m, "virtual");
  }
  for (const Diagnostic& d : mod.diagnostics()) {
    std::cout << "# diagnostic " << error_code_name(d.code) << " " << d.context
              << ": " << d.message << "\n";
  }
}

std::vector<std::pair<std::string, dex::DexModule>> load_dex_modules(
    const std::filesystem::path& file) {
  std::vector<std::pair<std::string, dex::DexModule>> modules;
  Bytes data = read_file(file);
  ByteSpan span(data.data(), data.size());
  if (classify_magic(span) == FileType::kAppArchive) {
    WalkOptions opts;
    opts.keep_exec_bytes = true;
    WalkResult walked = walk_archive(span, opts);
    for (const ExecutableRef& exec : walked.executables) {
      modules.emplace_back(exec.member_path,
                           dex::DexModule::parse(ByteSpan(exec.bytes.data(),
                                                          exec.bytes.size())));
    }
  } else {
    modules.emplace_back(file.string(), dex::DexModule::parse(span));
  }
  return modules;
}

void print_cfg(const dex::DexModule& mod, const dex::MethodBody& body,
               const PipelineConfig& config) {
  AnnotatedCfg cfg = build_cfg(body);
  annotate(&cfg, body, mod, config.api_prefixes);
  MethodFingerprint fp = fingerprint(cfg);
  std::cout << "fingerprint " << fp.hex() << "\n";
  for (size_t b = 0; b < cfg.blocks.size(); ++b) {
    const BasicBlock& block = cfg.blocks[b];
    std::cout << "block " << b << (block.reachable ? "" : " (unreachable)")
              << ": instructions [" << block.first_instruction << ", "
              << block.first_instruction + block.instruction_count << ")";
    std::cout << " ->";
    if (block.successors.empty()) std::cout << " (exit)";
    for (std::uint32_t s : block.successors) std::cout << " " << s;
    std::cout << "\n";
    for (const auto& [token, count] : block.annotations) {
      std::cout << "  api " << token;
      if (count > 1) std::cout << " x" << count;
      std::cout << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differential analysis of repackaged app corpora"};
  app.require_subcommand(1);

  std::string store_path = default_store();
  std::string cutoff_text = "0.9";
  std::string resource_cutoff_text = "0.3";
  int min_family_size = 7;
  int threads = 1;
  std::uint64_t seed = 0;
  app.add_option("--store", store_path, "store directory")
      ->envname("RIDERSCOPE_STORE")
      ->capture_default_str();
  app.add_option("--cutoff", cutoff_text, "rider share cutoff (HCO)")
      ->capture_default_str();
  app.add_option("--resource-cutoff", resource_cutoff_text,
                 "resource share cutoff")
      ->capture_default_str();
  app.add_option("--min-family-size", min_family_size,
                 "smallest family differential analysis runs on")
      ->capture_default_str();
  app.add_option("--threads", threads, "worker threads for per-sample stages")
      ->capture_default_str();
  app.add_option("--seed", seed, "seed for corpus generation")
      ->capture_default_str();

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "load a corpus from a manifest");
  std::string manifest_arg;
  std::string out_arg;
  ingest_cmd->add_option("--manifest", manifest_arg, "manifest jsonl")->required();
  ingest_cmd->add_option("--out", out_arg, "output store (default --store)");

  // labels
  auto* labels_cmd =
      app.add_subcommand("labels", "derive families from multi-vendor labels");
  std::string labels_manifest;
  std::string stopwords_file;
  int min_agreement = 2;
  labels_cmd->add_option("--manifest", labels_manifest,
                         "manifest jsonl (runs ingest first when given)");
  labels_cmd->add_option("--stopwords", stopwords_file, "one stopword per line");
  labels_cmd->add_option("--min-agreement", min_agreement,
                         "vendors that must agree on the winning token")
      ->capture_default_str();
  labels_cmd->add_option("--out", out_arg, "output store (default --store)");

  // dexdump
  auto* dexdump_cmd = app.add_subcommand("dexdump", "list classes/methods/invokes");
  std::string dexdump_file;
  dexdump_cmd->add_option("file", dexdump_file, "dex file or app archive")->required();

  // cfg
  auto* cfg_cmd = app.add_subcommand("cfg", "dump one method's annotated CFG");
  std::string cfg_file, cfg_class, cfg_method;
  cfg_cmd->add_option("file", cfg_file, "dex file or app archive")->required();
  cfg_cmd->add_option("class", cfg_class, "dotted class name")->required();
  cfg_cmd->add_option("method", cfg_method, "method name")->required();

  // fingerprint
  auto* fingerprint_cmd =
      app.add_subcommand("fingerprint", "fingerprint every method in the corpus");
  std::string corpus_arg;
  fingerprint_cmd->add_option("--corpus", corpus_arg, "ingested store");
  fingerprint_cmd->add_option("--out", out_arg, "output store (default --corpus)");

  // diff
  auto* diff_cmd = app.add_subcommand("diff", "per-family differential analysis");
  std::string prints_arg;
  bool print_curve = false;
  diff_cmd->add_option("--prints", prints_arg, "fingerprinted store");
  diff_cmd->add_option("--out", out_arg, "output store (default --prints)");
  diff_cmd->add_flag("--curve", print_curve, "also print prevalence curves");

  // behaviors
  auto* behaviors_cmd =
      app.add_subcommand("behaviors", "map rider sets to behavior categories");
  std::string riders_arg;
  std::string taxonomy_file;
  behaviors_cmd->add_option("--riders", riders_arg, "diffed store");
  behaviors_cmd->add_option("--out", out_arg,
                            "write the corpus behavior table to this csv file");
  behaviors_cmd->add_option("--taxonomy", taxonomy_file,
                            "override file: 'prefix CATEGORY' lines");

  // resources
  auto* resources_cmd =
      app.add_subcommand("resources", "differential analysis over embedded executables");
  std::string vocabulary_file;
  resources_cmd->add_option("--corpus", corpus_arg, "ingested store");
  resources_cmd->add_option("--out", out_arg,
                            "write the common-resource table to this csv file");
  resources_cmd->add_option("--vocabulary", vocabulary_file,
                            "script keywords, one per line");

  // analytics
  auto* analytics_cmd =
      app.add_subcommand("analytics", "family metrics, rankings and timelines");
  std::string top_key;
  int top_k = 10;
  std::vector<std::string> timeline_features;
  analytics_cmd->add_option("--corpus", corpus_arg, "ingested store");
  analytics_cmd->add_option("--prints", prints_arg,
                            "fingerprinted store (timelines; default --corpus)");
  analytics_cmd->add_option("--out", out_arg, "output store (default --corpus)");
  analytics_cmd->add_option("--top", top_key,
                            "print a ranking: largest|prevalent|viral|stealthy");
  analytics_cmd->add_option("-k", top_k, "ranking length")->capture_default_str();
  analytics_cmd->add_option("--timeline", timeline_features,
                            "feature (API name or CATEGORY) to emit a quarterly series for");

  // report
  auto* report_cmd = app.add_subcommand("report", "emit per-family case reports");
  std::string report_family;
  report_cmd->add_option("--family", report_family, "print this family's report");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a ground-truth corpus");
  std::string synth_spec_file;
  std::string synth_out;
  synth_cmd->add_option("--spec", synth_spec_file, "synthesis spec json")->required();
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "full pipeline over one store");
  std::string run_manifest;
  std::string ground_truth_file;
  run_cmd->add_option("--manifest", run_manifest, "manifest jsonl")->required();
  run_cmd->add_option("--ground-truth", ground_truth_file,
                      "score rider recovery against this file");
  run_cmd->add_option("--timeline", timeline_features,
                      "features to emit quarterly series for");
  run_cmd->add_option("--taxonomy", taxonomy_file,
                      "override file: 'prefix CATEGORY' lines");

  // Global flags may appear after the verb: riderscope diff --cutoff 0.9 ...
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig config;
    config.cutoffs.hco = Fraction::parse(cutoff_text);
    config.cutoffs.resource_cutoff = Fraction::parse(resource_cutoff_text);
    config.cutoffs.min_family_size = min_family_size;
    config.cutoffs.validate();
    config.threads = threads;
    config.min_agreement = min_agreement;
    config.timeline_features = timeline_features;
    if (!taxonomy_file.empty()) {
      std::ifstream in(taxonomy_file);
      if (!in) throw Error(ErrorCode::kStoreIo, "cannot open " + taxonomy_file);
      config.taxonomy.load_overrides(in);
    }
    if (!stopwords_file.empty()) {
      std::ifstream in(stopwords_file);
      if (!in) throw Error(ErrorCode::kStoreIo, "cannot open " + stopwords_file);
      config.stopwords.clear();
      std::string word;
      while (std::getline(in, word)) {
        if (!word.empty()) config.stopwords.insert(word);
      }
    }
    if (!vocabulary_file.empty()) {
      std::ifstream in(vocabulary_file);
      if (!in) throw Error(ErrorCode::kStoreIo, "cannot open " + vocabulary_file);
      config.script_vocabulary.clear();
      std::string word;
      while (std::getline(in, word)) {
        if (!word.empty()) config.script_vocabulary.push_back(word);
      }
    }

    Store store(store_path);

    if (*ingest_cmd) {
      Store out(out_arg.empty() ? store_path : out_arg);
      IngestSummary summary = stage_ingest(out, manifest_arg, config);
      std::cout << "ingested " << summary.samples << " samples ("
                << summary.malformed << " malformed, " << summary.manifest_rejects
                << " manifest rejects)\n";
    } else if (*labels_cmd) {
      Store out(out_arg.empty() ? store_path : out_arg);
      if (!labels_manifest.empty()) stage_ingest(out, labels_manifest, config);
      int labeled = stage_labels(out, config);
      for (const nlohmann::json& line : out.read_jsonl("labels.jsonl")) {
        std::cout << line.dump() << "\n";
      }
      std::cerr << "labeled " << labeled << " samples\n";
    } else if (*dexdump_cmd) {
      for (auto& [origin, mod] : load_dex_modules(dexdump_file)) {
        dump_module(mod, origin);
      }
    } else if (*cfg_cmd) {
      bool found = false;
      for (auto& [origin, mod] : load_dex_modules(cfg_file)) {
        auto try_method = [&](const dex::EncodedMethod& m) {
          const dex::MethodId& id = mod.methods()[m.method_idx];
          if (mod.class_dotted_name(id.class_type_idx) != cfg_class) return;
          if (mod.strings()[id.name_idx] != cfg_method) return;
          if (!m.body) {
            std::cout << "(no code)\n";
            found = true;
            return;
          }
          print_cfg(mod, *m.body, config);
          found = true;
        };
        for (const dex::ClassDef& cls : mod.classes()) {
          for (const dex::EncodedMethod& m : cls.direct_methods) try_method(m);
          for (const dex::EncodedMethod& m : cls.virtual_methods) try_method(m);
        }
      }
      if (!found) {
        std::cerr << "method not found: " << cfg_class << "." << cfg_method << "\n";
        return 1;
      }
    } else if (*fingerprint_cmd) {
      Store corpus(corpus_arg.empty() ? store_path : corpus_arg);
      Store out(out_arg.empty() ? corpus.root().string() : out_arg);
      FingerprintSummary summary = stage_fingerprint(corpus, out, config);
      std::cout << "fingerprinted " << summary.samples_processed << " samples, "
                << summary.method_bodies << " method bodies, "
                << summary.families.size() << " families\n";
    } else if (*diff_cmd) {
      Store prints(prints_arg.empty() ? store_path : prints_arg);
      Store out(out_arg.empty() ? prints.root().string() : out_arg);
      DiffSummary summary = stage_diff(prints, out, config, config.cutoffs.hco);
      std::cout << "families: " << summary.families_total << " total, "
                << summary.families_retained << " retained, "
                << summary.families_excluded_small << " below min size, "
                << summary.families_early_stage << " early-stage\n";
      if (print_curve) {
        nlohmann::json families = out.read_json("families.json");
        for (const auto& [family, entry] : families.items()) {
          if (!entry.contains("file")) continue;
          nlohmann::json j = out.read_json(entry["file"].get<std::string>());
          for (const nlohmann::json& p : j["curve"]) {
            std::cout << family << " " << p["share"].get<double>() << " "
                      << p["methods"].get<std::uint64_t>() << "\n";
          }
        }
      }
    } else if (*behaviors_cmd) {
      Store riders(riders_arg.empty() ? store_path : riders_arg);
      stage_behaviors(riders, riders, config);
      std::string csv = riders.read("behaviors.csv");
      if (!out_arg.empty()) write_file(std::filesystem::path(out_arg), csv);
      std::cout << csv;
    } else if (*resources_cmd) {
      Store corpus(corpus_arg.empty() ? store_path : corpus_arg);
      stage_resources(corpus, corpus, config);
      std::string csv = corpus.read("resources.csv");
      if (!out_arg.empty()) write_file(std::filesystem::path(out_arg), csv);
      std::cout << csv;
    } else if (*analytics_cmd) {
      Store corpus(corpus_arg.empty() ? store_path : corpus_arg);
      Store prints(prints_arg.empty() ? corpus.root().string() : prints_arg);
      Store out(out_arg.empty() ? corpus.root().string() : out_arg);
      stage_analytics(corpus, prints, out, config);
      if (!top_key.empty()) {
        RankKey key;
        if (top_key == "largest") key = RankKey::kLargest;
        else if (top_key == "prevalent") key = RankKey::kPrevalent;
        else if (top_key == "viral") key = RankKey::kViral;
        else if (top_key == "stealthy") key = RankKey::kStealthy;
        else throw Error(ErrorCode::kStoreIo, "unknown ranking key " + top_key);

        std::vector<SampleStamp> stamps;
        for (const nlohmann::json& s : corpus.read_jsonl("samples.jsonl")) {
          if (s.value("malformed", false)) continue;
          std::string family = s.value("family", "");
          if (family.empty()) continue;
          SampleStamp stamp;
          stamp.family = family;
          stamp.first_seen = *parse_utc(s["first_seen"].get<std::string>());
          if (s["dex_date"].is_string()) {
            stamp.dex_date = parse_utc(s["dex_date"].get<std::string>());
          }
          stamps.push_back(std::move(stamp));
        }
        auto metrics = family_metrics(stamps);
        metrics.erase(std::remove_if(metrics.begin(), metrics.end(),
                                     [&](const FamilyMetrics& m) {
                                       return m.size < static_cast<std::uint64_t>(
                                                  config.cutoffs.min_family_size);
                                     }),
                      metrics.end());
        auto top = top_families(metrics, key, static_cast<size_t>(top_k));
        std::cout << "rank,family,size,quarters_active,virality,stealth_days\n";
        int rank = 1;
        for (const FamilyMetrics& m : top) {
          std::cout << rank++ << "," << m.family << "," << m.size << ","
                    << m.quarters_active << "," << CsvWriter::number(m.virality, 6)
                    << "," << CsvWriter::number(m.stealth_days, 6) << "\n";
        }
      } else {
        std::cout << out.read("metrics.csv");
      }
    } else if (*report_cmd) {
      stage_report(store, config);
      if (!report_family.empty()) {
        std::string token = Store::family_file_token(report_family);
        if (!store.exists("reports/" + token + ".txt")) {
          throw Error(ErrorCode::kFamilyNotAnalyzed,
                      report_family + " has no analyzed profile in the store");
        }
        std::cout << store.read("reports/" + token + ".txt");
      } else {
        std::cout << "reports written under " << store.path("reports").string()
                  << "\n";
      }
    } else if (*synth_cmd) {
      SynthSpec spec = SynthSpec::parse_file(synth_spec_file);
      if (seed != 0) spec.seed = seed;
      SynthResult result = generate(spec, synth_out, config.taxonomy);
      std::cout << "wrote " << result.samples_written << " samples, manifest "
                << result.manifest_path.string() << ", ground truth "
                << result.ground_truth_path.string() << "\n";
    } else if (*run_cmd) {
      run_pipeline(store, run_manifest, config);
      std::cout << store.read("run_summary.json");
      if (!ground_truth_file.empty()) {
        auto scores = score_against_ground_truth(store, ground_truth_file);
        std::cout << "family,precision,recall,recovered,expected,excluded\n";
        for (const FamilyScore& s : scores) {
          std::cout << s.family << "," << CsvWriter::number(s.precision, 4) << ","
                    << CsvWriter::number(s.recall, 4) << "," << s.recovered << ","
                    << s.expected << "," << (s.excluded ? "yes" : "no") << "\n";
        }
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
