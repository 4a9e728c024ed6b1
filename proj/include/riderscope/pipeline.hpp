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

#ifndef RIDERSCOPE_PIPELINE_HPP_
#define RIDERSCOPE_PIPELINE_HPP_

#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "riderscope/analytics.hpp"
#include "riderscope/cfg.hpp"
#include "riderscope/csv.hpp"
#include "riderscope/dex.hpp"
#include "riderscope/diff.hpp"
#include "riderscope/elf_features.hpp"
#include "riderscope/ingest.hpp"
#include "riderscope/labels.hpp"
#include "riderscope/magic.hpp"
#include "riderscope/manifest.hpp"
#include "riderscope/resources.hpp"
#include "riderscope/script_features.hpp"
#include "riderscope/store.hpp"
#include "riderscope/taxonomy.hpp"

namespace riderscope {

// Stage plumbing over the on-disk store. Work inside a stage is parallel per
// sample where it pays off; outputs are merged in manifest order so the store
// bytes never depend on the thread count.

struct PipelineConfig {
  CutoffConfig cutoffs;
  WalkOptions walk;
  std::vector<std::string> api_prefixes = default_api_prefixes();
  Taxonomy taxonomy;
  std::set<std::string> stopwords = default_label_stopwords();
  int min_agreement = 2;
  int threads = 1;
  std::vector<std::string> timeline_features;
  std::vector<std::string> script_vocabulary = default_script_vocabulary();
};

namespace pipeline_detail {

inline nlohmann::json sample_to_json(const SampleRecord& rec,
                                     const std::string& abs_path) {
  nlohmann::json j;
  j["sha256"] = rec.sample_id;
  j["family"] = rec.family;
  j["first_seen"] = format_utc(rec.first_seen);
  if (rec.dex_date) j["dex_date"] = format_utc(*rec.dex_date);
  else j["dex_date"] = nullptr;
  j["path"] = rec.source_path;
  j["abs_path"] = abs_path;
  j["malformed"] = rec.malformed;
  nlohmann::json execs = nlohmann::json::array();
  for (const ExecutableRef& e : rec.executables) {
    execs.push_back({{"path", e.member_path},
                     {"digest", e.content_digest},
                     {"depth", e.depth}});
  }
  j["executables"] = std::move(execs);
  nlohmann::json resources = nlohmann::json::array();
  for (const ResourceRef& r : rec.resources) {
    resources.push_back({{"path", r.member_path},
                         {"type", file_type_name(r.file_type)},
                         {"digest", r.content_digest},
                         {"depth", r.depth}});
  }
  j["resources"] = std::move(resources);
  if (!rec.av_labels.empty()) j["av_labels"] = rec.av_labels;
  return j;
}

inline nlohmann::json diagnostic_to_json(const Diagnostic& d) {
  return {{"code", error_code_name(d.code)},
          {"context", d.context},
          {"message", d.message}};
}

// Deterministic worker pool: results land in a slot per index, merge order
// is index order.
template <typename Fn>
void parallel_for(size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int n = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// ingest: manifest -> samples.jsonl (+ diagnostics, summary)

struct IngestSummary {
  int samples = 0;
  int malformed = 0;
  int manifest_rejects = 0;
};

inline IngestSummary stage_ingest(const Store& store,
                                  const std::filesystem::path& manifest_path,
                                  const PipelineConfig& config) {
  ManifestResult manifest = load_manifest(manifest_path);
  std::filesystem::path base = std::filesystem::absolute(manifest_path).parent_path();

  struct Slot {
    nlohmann::json sample;
    std::vector<Diagnostic> diagnostics;
    bool malformed = false;
  };
  std::vector<Slot> slots(manifest.records.size());
  pipeline_detail::parallel_for(
      manifest.records.size(), config.threads, [&](size_t i) {
        SampleRecord rec = manifest.records[i];
        std::filesystem::path archive = rec.source_path;
        if (archive.is_relative()) archive = base / archive;
        ingest_sample(&rec, archive, config.walk, &slots[i].diagnostics);
        slots[i].malformed = rec.malformed;
        slots[i].sample = pipeline_detail::sample_to_json(rec, archive.string());
      });

  std::vector<nlohmann::json> lines;
  std::vector<nlohmann::json> diag_lines;
  for (const Diagnostic& d : manifest.diagnostics) {
    diag_lines.push_back(pipeline_detail::diagnostic_to_json(d));
  }
  IngestSummary summary;
  summary.manifest_rejects = static_cast<int>(manifest.diagnostics.size());
  for (Slot& slot : slots) {
    lines.push_back(std::move(slot.sample));
    if (slot.malformed) ++summary.malformed;
    for (const Diagnostic& d : slot.diagnostics) {
      diag_lines.push_back(pipeline_detail::diagnostic_to_json(d));
    }
  }
  summary.samples = static_cast<int>(lines.size());
  store.write_jsonl("samples.jsonl", lines);
  store.write_jsonl("ingest_diagnostics.jsonl", diag_lines);
  store.write_json("summary_ingest.json",
                   {{"samples", summary.samples},
                    {"malformed", summary.malformed},
                    {"manifest_rejects", summary.manifest_rejects}});
  return summary;
}

// ---------------------------------------------------------------------------
// labels: av_labels -> family per sample, for manifests without families

inline int stage_labels(const Store& store, const PipelineConfig& config) {
  auto samples = store.read_jsonl("samples.jsonl");
  std::vector<nlohmann::json> lines;
  int labeled = 0;
  for (const nlohmann::json& s : samples) {
    std::string family = s.value("family", "");
    if (family.empty() && s.contains("av_labels")) {
      VendorLabelSet labels;
      labels.sample_id = s["sha256"].get<std::string>();
      for (auto& [vendor, label] : s["av_labels"].items()) {
        labels.labels[vendor] = label.get<std::string>();
      }
      auto named = normalize_family(labels, config.stopwords, config.min_agreement);
      family = named.value_or("");
    }
    if (!family.empty()) ++labeled;
    lines.push_back({{"sha256", s["sha256"].get<std::string>()},
                     {"family", family}});
  }
  store.write_jsonl("labels.jsonl", lines);
  return labeled;
}

// ---------------------------------------------------------------------------
// fingerprint: archives -> per-family method prints with annotations

struct FingerprintSummary {
  int samples_processed = 0;
  int samples_skipped = 0;  // malformed or unlabeled
  int method_bodies = 0;
  int method_diagnostics = 0;
  std::vector<std::string> families;
};

inline FingerprintSummary stage_fingerprint(const Store& corpus, const Store& out,
                                            const PipelineConfig& config) {
  auto samples = corpus.read_jsonl("samples.jsonl");

  std::map<std::string, std::string> label_override;
  if (corpus.exists("labels.jsonl")) {
    for (const nlohmann::json& l : corpus.read_jsonl("labels.jsonl")) {
      label_override[l["sha256"].get<std::string>()] = l["family"].get<std::string>();
    }
  }

  struct MethodPrint {
    std::string print;
    std::string class_name;
    std::string method_name;
    std::set<std::string> api;
  };
  struct Slot {
    bool skipped = true;
    std::string family;
    std::string sample_id;
    std::map<std::string, MethodPrint> methods;  // keyed by print hex
    int bodies = 0;
    std::vector<Diagnostic> diagnostics;
  };
  std::vector<Slot> slots(samples.size());

  pipeline_detail::parallel_for(samples.size(), config.threads, [&](size_t i) {
    const nlohmann::json& s = samples[i];
    Slot& slot = slots[i];
    slot.sample_id = s["sha256"].get<std::string>();
    slot.family = s.value("family", "");
    auto it = label_override.find(slot.sample_id);
    if (it != label_override.end() && !it->second.empty()) slot.family = it->second;
    if (s.value("malformed", false) || slot.family.empty()) return;

    WalkOptions walk = config.walk;
    walk.keep_exec_bytes = true;
    WalkResult walked;
    try {
      walked = walk_archive(std::filesystem::path(s["abs_path"].get<std::string>()),
                            walk);
    } catch (const Error& e) {
      slot.diagnostics.push_back({ErrorCode::kArchiveCorrupt, slot.sample_id, e.what()});
      return;
    }
    slot.skipped = false;

    for (const ExecutableRef& exec : walked.executables) {
      dex::DexModule mod;
      try {
        mod = dex::DexModule::parse(ByteSpan(exec.bytes.data(), exec.bytes.size()));
      } catch (const Error& e) {
        slot.diagnostics.push_back({e.code(), exec.member_path, e.what()});
        continue;
      }
      for (const Diagnostic& d : mod.diagnostics()) slot.diagnostics.push_back(d);

      auto handle_method = [&](const dex::EncodedMethod& method) {
        if (!method.body) return;
        ++slot.bodies;
        AnnotatedCfg cfg;
        try {
          cfg = build_cfg(*method.body);
        } catch (const Error& e) {
          slot.diagnostics.push_back(
              {e.code(), mod.method_signature(method.method_idx), e.what()});
          return;
        }
        annotate(&cfg, *method.body, mod, config.api_prefixes);
        MethodFingerprint fp = fingerprint(cfg);

        const dex::MethodId& id = mod.methods()[method.method_idx];
        MethodPrint print;
        print.print = fp.hex();
        print.class_name = mod.class_dotted_name(id.class_type_idx);
        print.method_name = mod.strings()[id.name_idx];
        print.api = annotation_tokens(cfg);

        auto [slot_it, inserted] = slot.methods.try_emplace(print.print, print);
        if (!inserted) {
          // Same fingerprint seen twice in one sample: keep the smallest
          // (class, method) pair as the representative.
          MethodPrint& existing = slot_it->second;
          if (std::tie(print.class_name, print.method_name) <
              std::tie(existing.class_name, existing.method_name)) {
            existing.class_name = print.class_name;
            existing.method_name = print.method_name;
          }
          existing.api.insert(print.api.begin(), print.api.end());
        }
      };
      for (const dex::ClassDef& cls : mod.classes()) {
        for (const dex::EncodedMethod& m : cls.direct_methods) handle_method(m);
        for (const dex::EncodedMethod& m : cls.virtual_methods) handle_method(m);
      }
    }
  });

  // Merge in manifest order, grouped by family.
  std::map<std::string, std::vector<nlohmann::json>> per_family;
  FingerprintSummary summary;
  std::vector<nlohmann::json> diag_lines;
  for (Slot& slot : slots) {
    for (const Diagnostic& d : slot.diagnostics) {
      diag_lines.push_back(pipeline_detail::diagnostic_to_json(d));
    }
    if (slot.skipped) {
      ++summary.samples_skipped;
      continue;
    }
    ++summary.samples_processed;
    summary.method_bodies += slot.bodies;
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& [hex, m] : slot.methods) {
      methods.push_back({{"print", m.print},
                         {"class", m.class_name},
                         {"method", m.method_name},
                         {"api", m.api}});
    }
    per_family[slot.family].push_back(
        {{"sample", slot.sample_id}, {"methods", std::move(methods)}});
  }
  summary.method_diagnostics = static_cast<int>(diag_lines.size());

  nlohmann::json index;
  index["families"] = nlohmann::json::object();
  for (const auto& [family, lines] : per_family) {
    std::string token = Store::family_file_token(family);
    out.write_jsonl("prints/" + token + ".jsonl", lines);
    index["families"][family] = {{"file", "prints/" + token + ".jsonl"},
                                 {"samples", lines.size()}};
    summary.families.push_back(family);
  }
  index["samples_processed"] = summary.samples_processed;
  index["samples_skipped"] = summary.samples_skipped;
  index["method_bodies"] = summary.method_bodies;
  out.write_json("prints_index.json", index);
  out.write_jsonl("fingerprint_diagnostics.jsonl", diag_lines);
  return summary;
}

// ---------------------------------------------------------------------------
// diff: per-family prints -> rider sets + prevalence curves

struct FamilyPrints {
  std::string family;
  // sample -> fingerprint set, plus representative naming and tokens
  std::map<std::string, std::set<MethodFingerprint>> per_sample;
  struct MethodInfo {
    std::string class_name;
    std::string method_name;
    std::set<std::string> api;
  };
  std::map<std::string, MethodInfo> methods;  // keyed by print hex
};

inline FamilyPrints load_family_prints(const Store& prints, const std::string& family,
                                       const std::string& file) {
  FamilyPrints out;
  out.family = family;
  for (const nlohmann::json& line : prints.read_jsonl(file)) {
    std::string sample = line["sample"].get<std::string>();
    auto& fp_set = out.per_sample[sample];
    for (const nlohmann::json& m : line["methods"]) {
      std::string hex = m["print"].get<std::string>();
      auto fp = MethodFingerprint::from_hex(hex);
      if (!fp) continue;
      fp_set.insert(*fp);
      FamilyPrints::MethodInfo info;
      info.class_name = m["class"].get<std::string>();
      info.method_name = m["method"].get<std::string>();
      for (const auto& token : m["api"]) info.api.insert(token.get<std::string>());
      auto [it, inserted] = out.methods.try_emplace(hex, info);
      if (!inserted) {
        if (std::tie(info.class_name, info.method_name) <
            std::tie(it->second.class_name, it->second.method_name)) {
          it->second.class_name = info.class_name;
          it->second.method_name = info.method_name;
        }
        it->second.api.insert(info.api.begin(), info.api.end());
      }
    }
  }
  return out;
}

struct DiffSummary {
  int families_total = 0;
  int families_retained = 0;
  int families_excluded_small = 0;
  int families_early_stage = 0;
};

inline DiffSummary stage_diff(const Store& prints, const Store& out,
                              const PipelineConfig& config, const Fraction& cutoff) {
  nlohmann::json index = prints.read_json("prints_index.json");
  DiffSummary summary;
  nlohmann::json families_index = nlohmann::json::object();

  for (const auto& [family, entry] : index["families"].items()) {
    ++summary.families_total;
    FamilyPrints fam = load_family_prints(prints, family,
                                          entry["file"].get<std::string>());
    const int size = static_cast<int>(fam.per_sample.size());
    std::string token = Store::family_file_token(family);

    if (size < config.cutoffs.min_family_size) {
      ++summary.families_excluded_small;
      families_index[family] = {{"samples", size}, {"status", "excluded_small"}};
      continue;
    }

    FamilyProfile profile =
        build_profile(family, fam.per_sample, config.cutoffs.min_family_size);
    bool early = is_early_stage(profile, config.cutoffs.early_stage_fraction);
    auto riders = rider_set(profile, cutoff);
    auto curve = prevalence_curve(profile);

    nlohmann::json j;
    j["family"] = family;
    j["samples"] = size;
    j["cutoff"] = cutoff.str();
    j["threshold"] = cutoff.ceil_mul(size);
    j["early_stage"] = early;
    j["total_distinct_methods"] = profile.total_distinct_methods();
    nlohmann::json rider_rows = nlohmann::json::array();
    if (!early) {
      // Rider reporting order: descending prevalence, then class name.
      std::vector<const MethodFingerprint*> ordered;
      for (const MethodFingerprint& fp : riders) ordered.push_back(&fp);
      std::sort(ordered.begin(), ordered.end(),
                [&](const MethodFingerprint* a, const MethodFingerprint* b) {
                  std::uint32_t pa = profile.prevalence.at(*a);
                  std::uint32_t pb = profile.prevalence.at(*b);
                  if (pa != pb) return pa > pb;
                  const auto& ma = fam.methods.at(a->hex());
                  const auto& mb = fam.methods.at(b->hex());
                  if (ma.class_name != mb.class_name) {
                    return ma.class_name < mb.class_name;
                  }
                  if (ma.method_name != mb.method_name) {
                    return ma.method_name < mb.method_name;
                  }
                  return a->hex() < b->hex();
                });
      for (const MethodFingerprint* fp : ordered) {
        const auto& info = fam.methods.at(fp->hex());
        rider_rows.push_back({{"print", fp->hex()},
                              {"class", info.class_name},
                              {"method", info.method_name},
                              {"seen_in", profile.prevalence.at(*fp)},
                              {"api", info.api}});
      }
      ++summary.families_retained;
    } else {
      ++summary.families_early_stage;
    }
    j["riders"] = std::move(rider_rows);
    nlohmann::json curve_rows = nlohmann::json::array();
    for (const CurvePoint& p : curve) {
      curve_rows.push_back({{"shared_by", p.shared_by},
                            {"share", p.share_fraction},
                            {"methods", p.method_count}});
    }
    j["curve"] = std::move(curve_rows);
    out.write_json("riders/" + token + ".json", j);
    families_index[family] = {{"samples", size},
                              {"status", early ? "early_stage" : "retained"},
                              {"file", "riders/" + token + ".json"}};
  }
  out.write_json("families.json", families_index);
  return summary;
}

// ---------------------------------------------------------------------------
// behaviors: rider sets -> per-family category profiles + corpus table

inline void stage_behaviors(const Store& riders, const Store& out,
                            const PipelineConfig& config) {
  nlohmann::json families = riders.read_json("families.json");
  std::vector<BehaviorProfile> profiles;
  std::map<std::string, std::uint64_t> sample_counts;

  for (const auto& [family, entry] : families.items()) {
    if (entry["status"].get<std::string>() != "retained") continue;
    nlohmann::json j = riders.read_json(entry["file"].get<std::string>());
    std::set<MethodFingerprint> rider_set;
    std::map<MethodFingerprint, std::set<std::string>> annotations;
    for (const nlohmann::json& r : j["riders"]) {
      auto fp = MethodFingerprint::from_hex(r["print"].get<std::string>());
      if (!fp) continue;
      rider_set.insert(*fp);
      std::set<std::string>& api = annotations[*fp];
      for (const auto& token : r["api"]) api.insert(token.get<std::string>());
    }
    BehaviorProfile profile = behavior_profile(
        family, rider_set, annotations, config.taxonomy, j["cutoff"].get<std::string>());
    sample_counts[family] = j["samples"].get<std::uint64_t>();

    nlohmann::json out_json;
    out_json["family"] = family;
    out_json["basis"] = profile.basis;
    out_json["categories"] = profile.categories;
    out.write_json("behaviors/" + Store::family_file_token(family) + ".json",
                   out_json);
    profiles.push_back(std::move(profile));
  }

  auto table = corpus_behavior_table(profiles, sample_counts);
  CsvWriter csv({"category", "pct_families", "pct_samples"});
  for (const BehaviorTableRow& row : table) {
    csv.row({row.category, CsvWriter::number(row.pct_families, 1),
             CsvWriter::number(row.pct_samples, 1)});
  }
  out.write("behaviors.csv", csv.str());
}

// ---------------------------------------------------------------------------
// resources: embedded executables -> common digests + features

inline void stage_resources(const Store& corpus, const Store& out,
                            const PipelineConfig& config) {
  auto samples = corpus.read_jsonl("samples.jsonl");

  std::map<std::string, std::string> label_override;
  if (corpus.exists("labels.jsonl")) {
    for (const nlohmann::json& l : corpus.read_jsonl("labels.jsonl")) {
      label_override[l["sha256"].get<std::string>()] = l["family"].get<std::string>();
    }
  }

  struct ResourceInfo {
    std::string type;
    std::set<std::string> paths;
  };
  struct FamilyResources {
    std::map<std::string, std::set<std::string>> per_sample;  // sample -> digests
    std::map<std::string, ResourceInfo> info;                 // digest -> info
    std::vector<std::string> archives;
  };
  std::map<std::string, FamilyResources> families;

  for (const nlohmann::json& s : samples) {
    if (s.value("malformed", false)) continue;
    std::string family = s.value("family", "");
    auto it = label_override.find(s["sha256"].get<std::string>());
    if (it != label_override.end() && !it->second.empty()) family = it->second;
    if (family.empty()) continue;
    FamilyResources& fam = families[family];
    std::set<std::string>& digests = fam.per_sample[s["sha256"].get<std::string>()];
    for (const nlohmann::json& r : s["resources"]) {
      std::string type = r["type"].get<std::string>();
      if (type != "ELF_EXEC" && type != "TEXT_EXEC") continue;
      std::string digest = r["digest"].get<std::string>();
      digests.insert(digest);
      fam.info[digest].type = type;
      fam.info[digest].paths.insert(r["path"].get<std::string>());
    }
    fam.archives.push_back(s["abs_path"].get<std::string>());
  }

  CsvWriter csv({"family", "digest", "type", "seen_in", "samples"});
  for (const auto& [family, fam] : families) {
    const int size = static_cast<int>(fam.per_sample.size());
    if (size < config.cutoffs.min_family_size) continue;
    auto common = common_resources(fam.per_sample, config.cutoffs.resource_cutoff);

    // Pull the bytes of every common resource back out of the archives for
    // feature extraction.
    std::map<std::string, Bytes> content;
    if (!common.empty()) {
      WalkOptions walk = config.walk;
      walk.keep_resource_bytes = true;
      for (const std::string& archive : fam.archives) {
        if (content.size() == common.size()) break;
        WalkResult walked;
        try {
          walked = walk_archive(std::filesystem::path(archive), walk);
        } catch (const Error&) {
          continue;
        }
        for (ResourceRef& r : walked.resources) {
          if (common.count(r.content_digest) > 0 && !r.bytes.empty()) {
            content.try_emplace(r.content_digest, std::move(r.bytes));
          }
        }
      }
    }

    nlohmann::json j;
    j["family"] = family;
    j["samples"] = size;
    j["cutoff"] = config.cutoffs.resource_cutoff.str();
    nlohmann::json rows = nlohmann::json::array();
    for (const std::string& digest : common) {
      const ResourceInfo& info = fam.info.at(digest);
      std::int64_t seen_in = 0;
      for (const auto& [sample, digests] : fam.per_sample) {
        if (digests.count(digest) > 0) ++seen_in;
      }
      nlohmann::json row;
      row["digest"] = digest;
      row["type"] = info.type;
      row["paths"] = info.paths;
      row["seen_in"] = seen_in;
      auto content_it = content.find(digest);
      if (content_it != content.end()) {
        ByteSpan bytes(content_it->second.data(), content_it->second.size());
        if (info.type == "ELF_EXEC") {
          try {
            ElfFeatureSet features = parse_elf_features(bytes);
            row["elf"] = {{"imported_functions", features.imported_functions},
                          {"needed_libraries", features.needed_libraries},
                          {"machine", features.machine}};
          } catch (const Error& e) {
            row["error"] = e.what();
          }
        } else {
          try {
            ScriptFeatureSet features =
                extract_script_features(bytes, config.script_vocabulary);
            row["script"] = {{"keyword_counts", features.keyword_counts}};
          } catch (const Error& e) {
            row["error"] = e.what();
          }
        }
      }
      rows.push_back(std::move(row));
      csv.row({family, digest, info.type, std::to_string(seen_in),
               std::to_string(size)});
    }
    j["common"] = std::move(rows);
    out.write_json("resources/" + Store::family_file_token(family) + ".json", j);
  }
  out.write("resources.csv", csv.str());
}

// ---------------------------------------------------------------------------
// analytics: metrics.csv + optional timelines

inline void stage_analytics(const Store& corpus, const Store& prints,
                            const Store& out, const PipelineConfig& config) {
  auto samples = corpus.read_jsonl("samples.jsonl");

  std::map<std::string, std::string> label_override;
  if (corpus.exists("labels.jsonl")) {
    for (const nlohmann::json& l : corpus.read_jsonl("labels.jsonl")) {
      label_override[l["sha256"].get<std::string>()] = l["family"].get<std::string>();
    }
  }
  auto family_of = [&](const nlohmann::json& s) {
    std::string family = s.value("family", "");
    auto it = label_override.find(s["sha256"].get<std::string>());
    if (it != label_override.end() && !it->second.empty()) family = it->second;
    return family;
  };

  std::vector<SampleStamp> stamps;
  for (const nlohmann::json& s : samples) {
    if (s.value("malformed", false)) continue;
    std::string family = family_of(s);
    if (family.empty()) continue;
    SampleStamp stamp;
    stamp.family = family;
    stamp.first_seen = *parse_utc(s["first_seen"].get<std::string>());
    if (s.contains("dex_date") && s["dex_date"].is_string()) {
      stamp.dex_date = parse_utc(s["dex_date"].get<std::string>());
    }
    stamps.push_back(std::move(stamp));
  }

  auto metrics = family_metrics(stamps);
  std::sort(metrics.begin(), metrics.end(),
            [](const FamilyMetrics& a, const FamilyMetrics& b) {
              return a.family < b.family;
            });

  std::map<std::string, std::string> early_flags;
  if (out.exists("families.json")) {
    nlohmann::json families = out.read_json("families.json");
    for (const auto& [family, entry] : families.items()) {
      early_flags[family] =
          entry["status"].get<std::string>() == "early_stage" ? "true" : "false";
    }
  }

  CsvWriter csv({"family", "size", "quarters_active", "virality", "stealth_days",
                 "early_stage"});
  for (const FamilyMetrics& m : metrics) {
    if (m.size < static_cast<std::uint64_t>(config.cutoffs.min_family_size)) continue;
    auto flag = early_flags.find(m.family);
    csv.row({m.family, std::to_string(m.size), std::to_string(m.quarters_active),
             CsvWriter::number(m.virality, 6), CsvWriter::number(m.stealth_days, 6),
             flag == early_flags.end() ? "" : flag->second});
  }
  out.write("metrics.csv", csv.str());

  // Timelines need per-sample token sets; the cutoff is applied to the
  // samples of a family active in each quarter.
  if (!config.timeline_features.empty() && prints.exists("prints_index.json")) {
    nlohmann::json index = prints.read_json("prints_index.json");
    struct SampleTokens {
      std::string family;
      std::string sample;
      std::set<std::string> tokens;
    };
    std::map<std::string, std::set<std::string>> tokens_by_sample;
    for (const auto& [family, entry] : index["families"].items()) {
      for (const nlohmann::json& line :
           prints.read_jsonl(entry["file"].get<std::string>())) {
        std::set<std::string>& tokens =
            tokens_by_sample[line["sample"].get<std::string>()];
        for (const nlohmann::json& m : line["methods"]) {
          for (const auto& token : m["api"]) tokens.insert(token.get<std::string>());
        }
      }
    }

    for (const std::string& feature : config.timeline_features) {
      std::vector<QuarterSample> quarter_samples;
      for (const nlohmann::json& s : samples) {
        if (s.value("malformed", false)) continue;
        std::string family = family_of(s);
        if (family.empty()) continue;
        auto tokens_it = tokens_by_sample.find(s["sha256"].get<std::string>());
        if (tokens_it == tokens_by_sample.end()) continue;
        QuarterSample qs;
        qs.family = family;
        qs.quarter = quarter_of(*parse_utc(s["first_seen"].get<std::string>()));
        qs.has_feature = false;
        for (const std::string& token : tokens_it->second) {
          if (token_matches_feature(token, feature, config.taxonomy)) {
            qs.has_feature = true;
            break;
          }
        }
        quarter_samples.push_back(std::move(qs));
      }
      QuarterSeries series =
          quarterly_prevalence(quarter_samples, feature, config.cutoffs.hco);

      std::string token = Store::feature_file_token(feature);
      CsvWriter timeline_csv({"quarter", "active_families", "exhibiting_families",
                              "fraction", "single_sample_families"});
      for (const QuarterPoint& p : series.points) {
        timeline_csv.row({quarter_label(p.quarter),
                          std::to_string(p.active_families),
                          std::to_string(p.exhibiting_families),
                          CsvWriter::number(p.fraction, 6),
                          std::to_string(p.single_sample_families)});
      }
      out.write("timelines/" + token + ".csv", timeline_csv.str());
      nlohmann::json fit;
      fit["feature"] = feature;
      if (series.fit) {
        fit["slope_per_quarter"] = series.fit->slope;
        fit["intercept"] = series.fit->intercept;
      } else {
        fit["slope_per_quarter"] = nullptr;
        fit["intercept"] = nullptr;
      }
      out.write_json("timelines/" + token + ".fit.json", fit);
    }
  }
}

// ---------------------------------------------------------------------------
// report: per-family case studies, human- and machine-readable

inline std::string render_case_report(const nlohmann::json& riders_json,
                                      const nlohmann::json* behaviors_json,
                                      const nlohmann::json* resources_json) {
  const std::string family = riders_json["family"].get<std::string>();
  const int samples = riders_json["samples"].get<int>();
  std::string out;
  out += "Family: " + family + "\n";
  out += "Samples: " + std::to_string(samples) + "\n";
  out += "Cutoff: " + riders_json["cutoff"].get<std::string>() + " (threshold " +
         std::to_string(riders_json["threshold"].get<int>()) + " of " +
         std::to_string(samples) + ")\n";
  bool early = riders_json["early_stage"].get<bool>();
  out += "Early stage: ";
  out += early ? "yes (excluded from rider reporting)" : "no";
  out += "\n\n";

  const auto& riders = riders_json["riders"];
  if (early) {
    out += "Family flagged early-stage repackaging; no rider analysis emitted.\n";
  } else if (riders.empty()) {
    out += "no rider methods at cutoff " + riders_json["cutoff"].get<std::string>() +
           "\n";
  } else {
    out += "Rider methods (" + std::to_string(riders.size()) + "):\n";
    int index = 1;
    for (const nlohmann::json& r : riders) {
      out += "\nMethod-" + std::to_string(index++) + ":\n";
      out += "  Seen in: " + std::to_string(r["seen_in"].get<int>()) + " apps (out of " +
             std::to_string(samples) + ")\n";
      out += "  Class Name: " + r["class"].get<std::string>() + "\n";
      out += "  Method name: " + r["method"].get<std::string>() + "\n";
      out += "  Behaviors: {";
      bool first = true;
      for (const auto& cat : r["behaviors"]) {
        if (!first) out += ", ";
        out += cat.get<std::string>();
        first = false;
      }
      out += "}\n";
    }
  }

  out += "\nBehavior summary: {";
  bool first = true;
  if (behaviors_json != nullptr) {
    for (const auto& [cat, count] : (*behaviors_json)["categories"].items()) {
      if (!first) out += ", ";
      out += cat;
      first = false;
    }
  }
  out += "}\n";

  if (resources_json != nullptr && !(*resources_json)["common"].empty()) {
    const auto& common = (*resources_json)["common"];
    out += "Common executable resources (" + std::to_string(common.size()) + "):\n";
    for (const nlohmann::json& r : common) {
      out += "  " + r["digest"].get<std::string>() + " (" +
             r["type"].get<std::string>() + "), seen in " +
             std::to_string(r["seen_in"].get<int>()) + " of " +
             std::to_string(samples) + "\n";
    }
  } else {
    out += "Common executable resources: none at resource cutoff\n";
  }
  return out;
}

inline void stage_report(const Store& store, const PipelineConfig& config) {
  nlohmann::json families = store.read_json("families.json");
  for (const auto& [family, entry] : families.items()) {
    if (!entry.contains("file")) continue;  // excluded_small
    std::string token = Store::family_file_token(family);
    nlohmann::json riders_json = store.read_json(entry["file"].get<std::string>());

    // Attach per-method behavior tokens so report and store agree exactly.
    for (nlohmann::json& r : riders_json["riders"]) {
      std::set<std::string> cats;
      for (const auto& token_json : r["api"]) {
        for (const std::string& cat :
             config.taxonomy.api_categories(token_json.get<std::string>())) {
          cats.insert(cat);
        }
      }
      r["behaviors"] = cats;
    }

    nlohmann::json behaviors;
    const nlohmann::json* behaviors_ptr = nullptr;
    if (store.exists("behaviors/" + token + ".json")) {
      behaviors = store.read_json("behaviors/" + token + ".json");
      behaviors_ptr = &behaviors;
    }
    nlohmann::json resources;
    const nlohmann::json* resources_ptr = nullptr;
    if (store.exists("resources/" + token + ".json")) {
      resources = store.read_json("resources/" + token + ".json");
      resources_ptr = &resources;
    }

    nlohmann::json machine;
    machine["family"] = family;
    machine["samples"] = riders_json["samples"];
    machine["cutoff"] = riders_json["cutoff"];
    machine["threshold"] = riders_json["threshold"];
    machine["early_stage"] = riders_json["early_stage"];
    machine["riders"] = riders_json["riders"];
    machine["behavior_summary"] =
        behaviors_ptr ? (*behaviors_ptr)["categories"] : nlohmann::json::object();
    machine["resources"] =
        resources_ptr ? (*resources_ptr)["common"] : nlohmann::json::array();

    store.write_json("reports/" + token + ".json", machine);
    store.write("reports/" + token + ".txt",
                render_case_report(riders_json, behaviors_ptr, resources_ptr));
  }
}

// ---------------------------------------------------------------------------
// run: the whole pipeline over one store

struct RunSummary {
  IngestSummary ingest;
  FingerprintSummary fingerprint;
  DiffSummary diff;
};

inline RunSummary run_pipeline(const Store& store,
                               const std::filesystem::path& manifest_path,
                               const PipelineConfig& config) {
  RunSummary summary;
  summary.ingest = stage_ingest(store, manifest_path, config);
  stage_labels(store, config);
  summary.fingerprint = stage_fingerprint(store, store, config);
  summary.diff = stage_diff(store, store, config, config.cutoffs.hco);
  stage_behaviors(store, store, config);
  stage_resources(store, store, config);
  stage_analytics(store, store, store, config);
  stage_report(store, config);

  nlohmann::json j;
  j["samples_total"] = summary.ingest.samples;
  j["samples_malformed"] = summary.ingest.malformed;
  j["manifest_rejects"] = summary.ingest.manifest_rejects;
  j["samples_fingerprinted"] = summary.fingerprint.samples_processed;
  j["samples_skipped"] = summary.fingerprint.samples_skipped;
  j["method_bodies"] = summary.fingerprint.method_bodies;
  j["families_total"] = summary.diff.families_total;
  j["families_retained"] = summary.diff.families_retained;
  j["families_excluded_small"] = summary.diff.families_excluded_small;
  j["families_early_stage"] = summary.diff.families_early_stage;
  j["cutoff"] = config.cutoffs.hco.str();
  j["resource_cutoff"] = config.cutoffs.resource_cutoff.str();
  j["min_family_size"] = config.cutoffs.min_family_size;
  store.write_json("run_summary.json", j);
  return summary;
}

// ---------------------------------------------------------------------------
// scoring against a generated ground-truth file

struct FamilyScore {
  std::string family;
  double precision = 0;
  double recall = 0;
  int recovered = 0;
  int expected = 0;
  int shared_library_included = 0;
  bool excluded = false;  // early-stage or too small; no rider set to score
};

inline std::vector<FamilyScore> score_against_ground_truth(
    const Store& store, const std::filesystem::path& truth_path) {
  Bytes raw = read_file(truth_path);
  nlohmann::json truth = nlohmann::json::parse(std::string(raw.begin(), raw.end()));
  nlohmann::json families = store.read_json("families.json");

  std::vector<FamilyScore> scores;
  for (const auto& [family, fam_truth] : truth["families"].items()) {
    FamilyScore score;
    score.family = family;
    std::set<std::string> expected;
    for (const auto& p : fam_truth["rider_prints"]) {
      expected.insert(p.get<std::string>());
    }
    std::set<std::string> shared;
    if (fam_truth.contains("shared_library_prints")) {
      for (const auto& p : fam_truth["shared_library_prints"]) {
        shared.insert(p.get<std::string>());
      }
    }
    score.expected = static_cast<int>(expected.size());

    if (!families.contains(family) ||
        families[family]["status"].get<std::string>() != "retained") {
      score.excluded = true;
      scores.push_back(std::move(score));
      continue;
    }
    nlohmann::json riders_json =
        store.read_json(families[family]["file"].get<std::string>());
    std::set<std::string> recovered;
    for (const nlohmann::json& r : riders_json["riders"]) {
      recovered.insert(r["print"].get<std::string>());
    }
    score.recovered = static_cast<int>(recovered.size());
    int hits = 0;
    for (const std::string& p : recovered) {
      if (expected.count(p) > 0) ++hits;
      if (shared.count(p) > 0) ++score.shared_library_included;
    }
    score.precision = recovered.empty() ? (expected.empty() ? 1.0 : 0.0)
                                        : static_cast<double>(hits) /
                                              static_cast<double>(recovered.size());
    score.recall = expected.empty() ? 1.0
                                    : static_cast<double>(hits) /
                                          static_cast<double>(expected.size());
    scores.push_back(std::move(score));
  }
  return scores;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_PIPELINE_HPP_
