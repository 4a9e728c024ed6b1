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

#ifndef RIDERSCOPE_SYNTH_HPP_
#define RIDERSCOPE_SYNTH_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "riderscope/cfg.hpp"
#include "riderscope/common.hpp"
#include "riderscope/dex.hpp"
#include "riderscope/dex_builder.hpp"
#include "riderscope/digest.hpp"
#include "riderscope/hash.hpp"
#include "riderscope/taxonomy.hpp"
#include "riderscope/utc.hpp"
#include "riderscope/zip.hpp"

namespace riderscope {

// Ground-truth corpus fabrication: families of carrier apps piggybacked with
// known rider method sets, under controllable variants, label noise, temporal
// drift, and embedded resources. Everything is a pure function of the spec
// and its seed, so two runs emit byte-identical corpora.
//
// Method bodies carry a serial number encoded in the instruction counts of a
// five-block entry chain. Instruction counts are structural, so distinct
// serials give provably distinct fingerprints, which is what lets the
// ground-truth file promise exact precision/recall.

struct SynthResource {
  std::string member_name;
  std::string kind;  // "script" | "elf_stub" | "elf_bad" | "blob"
  std::string content;  // script text or blob filler
  int count = 0;        // samples that embed it (first `count` carriers)
};

struct SynthRiderMethod {
  std::vector<std::string> apis;  // dotted framework calls this rider makes
};

struct SynthVariant {
  double fraction = 0;
  std::vector<SynthRiderMethod> extra_rider_methods;
};

struct SynthFamily {
  std::string name;
  int carriers = 0;
  std::vector<SynthRiderMethod> rider_methods;
  std::vector<SynthVariant> variants;
  double label_noise = 0;  // fraction of samples swapped with the next family
  std::vector<QuarterId> quarters;  // sample i is first seen in quarters[i % n]
  double stealth_days = 10;
  bool clone_carriers = false;
  int shared_library_methods = 0;  // identical benign methods in every sample
  bool emit_av_labels = false;
  std::vector<SynthResource> resources;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  int carrier_methods = 10;  // unique per sample unless clone_carriers
  std::vector<SynthFamily> families;

  static SynthSpec parse(const nlohmann::json& doc);
  static SynthSpec parse_file(const std::filesystem::path& path) {
    Bytes raw = read_file(path);
    return parse(nlohmann::json::parse(std::string(raw.begin(), raw.end())));
  }
};

struct SynthResult {
  std::filesystem::path manifest_path;
  std::filesystem::path ground_truth_path;
  int samples_written = 0;
};

namespace synth_detail {

constexpr int kChainBlocks = 5;  // 7 bits of serial per block

enum class MethodTag : std::uint64_t {
  kCarrier = 1,
  kRider = 2,
  kVariant = 3,
  kSharedLib = 4,
};

inline std::uint64_t make_serial(MethodTag tag, int family, int sample, int method) {
  return (static_cast<std::uint64_t>(tag) << 30) |
         (static_cast<std::uint64_t>(family & 0xff) << 22) |
         (static_cast<std::uint64_t>(sample & 0xfff) << 10) |
         static_cast<std::uint64_t>(method & 0x3ff);
}

inline std::pair<std::string, std::string> split_api(const std::string& dotted) {
  auto last_dot = dotted.rfind('.');
  if (last_dot == std::string::npos || last_dot == 0) {
    throw Error(ErrorCode::kSynthIo, "rider api must be a dotted name: " + dotted);
  }
  std::string cls = dotted.substr(0, last_dot);
  std::string descriptor = "L";
  for (char c : cls) descriptor.push_back(c == '.' ? '/' : c);
  descriptor.push_back(';');
  return {descriptor, dotted.substr(last_dot + 1)};
}

// Serial chain, optional random shape, one invoke run, return. Identical
// (serial, seed, apis) means an identical body everywhere it is emitted.
inline dex::MethodAsm make_method(std::uint64_t serial, std::uint64_t seed,
                                  const std::vector<dex::MethodHandle>& api_refs) {
  dex::MethodAsm body;
  for (int b = 0; b < kChainBlocks; ++b) {
    int count = 1 + static_cast<int>((serial >> (7 * b)) & 0x7f);
    for (int i = 0; i < count; ++i) body.const4(i & 7, i & 15);
    auto next = body.new_label();
    body.goto16(next);
    body.bind(next);
  }

  std::uint8_t serial_bytes[8];
  for (int i = 0; i < 8; ++i) serial_bytes[i] = static_cast<std::uint8_t>(serial >> (8 * i));
  std::mt19937_64 rng(murmur64(ByteSpan(serial_bytes, 8), seed));
  if (rng() % 2 == 0) {
    // A small diamond on top of the chain.
    auto join = body.new_label();
    auto other = body.new_label();
    body.const4(0, 0);
    body.if_eqz(0, other);
    int then_len = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < then_len; ++i) body.add_int_lit8(1, 1, 1);
    body.goto16(join);
    body.bind(other);
    int else_len = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < else_len; ++i) body.const4(2, 3);
    body.bind(join);
  }

  if (!api_refs.empty()) {
    body.const4(0, 0);
    for (dex::MethodHandle api : api_refs) body.invoke_virtual(api, 0);
  }
  body.return_void();
  return body;
}

inline Bytes make_elf_stub(std::uint64_t tag) {
  Bytes stub(0x40, 0);
  const std::uint8_t header[20] = {0x7f, 'E', 'L', 'F', 1, 1, 1, 0, 0, 0,
                                   0,    0,   0,   0,   0, 0, 3, 0, 40, 0};
  std::copy(header, header + 20, stub.begin());
  for (int i = 0; i < 8; ++i) {
    stub[0x30 + i] = static_cast<std::uint8_t>(tag >> (8 * i));
  }
  return stub;  // shoff stays 0: parseable, importing nothing
}

inline Bytes resource_bytes(const SynthResource& res, const std::string& family) {
  std::uint64_t tag = murmur64(family + "/" + res.member_name);
  if (res.kind == "script") {
    std::string text = res.content.empty()
                           ? "#!/system/bin/sh\nmount -o remount,rw /system\n"
                           : res.content;
    return Bytes(text.begin(), text.end());
  }
  if (res.kind == "elf_stub") return make_elf_stub(tag);
  if (res.kind == "elf_bad") {
    Bytes bad = {0x7f, 'E', 'L', 'F', 1, 1};
    for (int i = 0; i < 8; ++i) bad.push_back(static_cast<std::uint8_t>(tag >> (8 * i)));
    return bad;
  }
  // "blob": OTHER-typed filler.
  Bytes blob(64);
  for (size_t i = 0; i < blob.size(); ++i) {
    blob[i] = static_cast<std::uint8_t>((tag >> (8 * (i % 8))) ^ i);
  }
  if (!res.content.empty()) blob.assign(res.content.begin(), res.content.end());
  return blob;
}

}  // namespace synth_detail

inline SynthSpec SynthSpec::parse(const nlohmann::json& doc) {
  SynthSpec spec;
  spec.seed = doc.value("seed", 0ull);
  spec.carrier_methods = doc.value("carrier_methods", 10);
  if (!doc.contains("families") || !doc["families"].is_array()) {
    throw Error(ErrorCode::kSynthIo, "spec needs a families array");
  }
  auto parse_rider_list = [](const nlohmann::json& arr) {
    std::vector<SynthRiderMethod> out;
    for (const auto& item : arr) {
      SynthRiderMethod m;
      if (item.is_object() && item.contains("apis")) {
        for (const auto& api : item["apis"]) m.apis.push_back(api.get<std::string>());
      }
      out.push_back(std::move(m));
    }
    return out;
  };
  for (const auto& fam : doc["families"]) {
    SynthFamily family;
    family.name = fam.at("name").get<std::string>();
    family.carriers = fam.at("carriers").get<int>();
    if (fam.contains("rider_methods")) {
      family.rider_methods = parse_rider_list(fam["rider_methods"]);
    }
    if (fam.contains("variants")) {
      for (const auto& v : fam["variants"]) {
        SynthVariant variant;
        variant.fraction = v.at("fraction").get<double>();
        if (v.contains("extra_rider_methods")) {
          variant.extra_rider_methods = parse_rider_list(v["extra_rider_methods"]);
        }
        family.variants.push_back(std::move(variant));
      }
    }
    family.label_noise = fam.value("label_noise", 0.0);
    family.stealth_days = fam.value("stealth_days", 10.0);
    family.clone_carriers = fam.value("clone_carriers", false);
    family.shared_library_methods = fam.value("shared_library_methods", 0);
    family.emit_av_labels = fam.value("emit_av_labels", false);
    if (fam.contains("quarters")) {
      const auto& q = fam["quarters"];
      if (q.is_object()) {
        auto start = parse_quarter(q.at("start").get<std::string>());
        auto end = parse_quarter(q.at("end").get<std::string>());
        if (!start || !end || *end < *start) {
          throw Error(ErrorCode::kSynthIo, "bad quarter range");
        }
        for (QuarterId id = *start; id <= *end; ++id) family.quarters.push_back(id);
      } else {
        for (const auto& label : q) {
          auto id = parse_quarter(label.get<std::string>());
          if (!id) throw Error(ErrorCode::kSynthIo, "bad quarter label");
          family.quarters.push_back(*id);
        }
      }
    }
    if (family.quarters.empty()) {
      family.quarters.push_back(*parse_quarter("2014Q1"));
    }
    if (fam.contains("resources")) {
      for (const auto& r : fam["resources"]) {
        SynthResource res;
        res.member_name = r.at("name").get<std::string>();
        res.kind = r.value("kind", "blob");
        res.content = r.value("content", "");
        if (r.contains("count")) {
          res.count = r["count"].get<int>();
        } else {
          double fraction = r.value("fraction", 1.0);
          res.count = static_cast<int>(fraction * family.carriers + 0.5);
        }
        family.resources.push_back(std::move(res));
      }
    }
    spec.families.push_back(std::move(family));
  }
  return spec;
}

// Fingerprints a method program in isolation; embedded in any carrier the
// same program yields the same fingerprint, so these serve as ground truth.
inline MethodFingerprint probe_fingerprint(
    std::uint64_t serial, std::uint64_t seed,
    const std::vector<std::string>& apis,
    const std::vector<std::string>& api_prefixes = default_api_prefixes()) {
  dex::DexBuilder builder;
  builder.add_class("Lprobe/P;");
  std::vector<dex::MethodHandle> refs;
  for (const std::string& api : apis) {
    auto [descriptor, name] = synth_detail::split_api(api);
    refs.push_back(builder.method_ref(descriptor, name));
  }
  builder.add_method("Lprobe/P;", "m",
                     synth_detail::make_method(serial, seed, refs));
  Bytes bytes = builder.build();
  dex::DexModule mod = dex::DexModule::parse(ByteSpan(bytes.data(), bytes.size()));
  for (const auto& cls : mod.classes()) {
    for (const auto& m : cls.direct_methods) {
      if (!m.body) continue;
      AnnotatedCfg cfg = build_cfg(*m.body);
      annotate(&cfg, *m.body, mod, api_prefixes);
      return fingerprint(cfg);
    }
  }
  throw Error(ErrorCode::kSynthIo, "probe produced no method body");
}

inline SynthResult generate(const SynthSpec& spec,
                            const std::filesystem::path& out_dir,
                            const Taxonomy& taxonomy = Taxonomy{}) {
  using synth_detail::MethodTag;
  using synth_detail::make_serial;

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "apks", ec);
  if (ec) throw Error(ErrorCode::kSynthIo, "cannot create " + out_dir.string());

  struct PendingSample {
    std::string family;       // label after noise injection
    std::string true_family;  // generator's family
    std::string rel_path;
    std::string digest;
    UtcSeconds first_seen = 0;
    UtcSeconds dex_date = 0;
    bool emit_av_labels = false;
  };
  std::vector<PendingSample> samples;

  nlohmann::json truth;
  truth["seed"] = spec.seed;
  truth["families"] = nlohmann::json::object();

  for (size_t fam_idx = 0; fam_idx < spec.families.size(); ++fam_idx) {
    const SynthFamily& family = spec.families[fam_idx];
    const int n = family.carriers;

    // Variant assignment: contiguous ranges by fraction, remainder to the
    // last variant (or no variant at all when none are declared).
    std::vector<int> variant_of(n, -1);
    if (!family.variants.empty()) {
      int assigned = 0;
      for (size_t v = 0; v < family.variants.size(); ++v) {
        int quota = static_cast<int>(family.variants[v].fraction * n + 0.5);
        if (v + 1 == family.variants.size()) quota = n - assigned;
        for (int i = 0; i < quota && assigned < n; ++i, ++assigned) {
          variant_of[assigned] = static_cast<int>(v);
        }
      }
    }

    for (int i = 0; i < n; ++i) {
      dex::DexBuilder builder;
      std::string carrier_class =
          "Lsynth/" + family.name + "/c" + std::to_string(i) + "/Carrier;";
      std::string rider_class = "Lsynth/" + family.name + "/sdk/Payload;";
      builder.add_class(carrier_class);
      builder.add_class(rider_class);

      auto refs_for = [&](const std::vector<std::string>& apis) {
        std::vector<dex::MethodHandle> refs;
        for (const std::string& api : apis) {
          auto [descriptor, name] = synth_detail::split_api(api);
          refs.push_back(builder.method_ref(descriptor, name));
        }
        return refs;
      };

      for (int m = 0; m < spec.carrier_methods; ++m) {
        int sample_key = family.clone_carriers ? 0 : i;
        std::uint64_t serial = make_serial(MethodTag::kCarrier,
                                           static_cast<int>(fam_idx), sample_key, m);
        builder.add_method(carrier_class, "c" + std::to_string(m),
                           synth_detail::make_method(serial, spec.seed, {}));
      }
      for (size_t m = 0; m < family.rider_methods.size(); ++m) {
        std::uint64_t serial = make_serial(MethodTag::kRider,
                                           static_cast<int>(fam_idx), 0,
                                           static_cast<int>(m));
        builder.add_method(rider_class, "r" + std::to_string(m),
                           synth_detail::make_method(
                               serial, spec.seed,
                               refs_for(family.rider_methods[m].apis)));
      }
      if (variant_of[i] >= 0) {
        const SynthVariant& variant = family.variants[variant_of[i]];
        for (size_t m = 0; m < variant.extra_rider_methods.size(); ++m) {
          std::uint64_t serial = make_serial(
              MethodTag::kVariant, static_cast<int>(fam_idx), variant_of[i],
              static_cast<int>(m));
          builder.add_method(rider_class, "v" + std::to_string(variant_of[i]) +
                                              "_" + std::to_string(m),
                             synth_detail::make_method(
                                 serial, spec.seed,
                                 refs_for(variant.extra_rider_methods[m].apis)));
        }
      }
      for (int m = 0; m < family.shared_library_methods; ++m) {
        std::uint64_t serial = make_serial(MethodTag::kSharedLib,
                                           static_cast<int>(fam_idx), 0, m);
        builder.add_method(rider_class, "lib" + std::to_string(m),
                           synth_detail::make_method(serial, spec.seed, {}));
      }

      Bytes dex = builder.build();

      const QuarterId quarter = family.quarters[i % family.quarters.size()];
      UtcSeconds first_seen = quarter_start(quarter) +
                              ((i * 7) % 80) * 86400 + (i % 24) * 3600;
      UtcSeconds dex_date =
          first_seen - static_cast<UtcSeconds>(family.stealth_days * 86400.0);

      ZipWriter zip;
      zip.add("assets/id.txt", [&] {
        std::string id = family.name + "/" + std::to_string(i);
        return Bytes(id.begin(), id.end());
      }(), dex_date);
      for (const SynthResource& res : family.resources) {
        if (i < res.count) {
          Bytes content = synth_detail::resource_bytes(res, family.name);
          zip.add(res.member_name, ByteSpan(content.data(), content.size()),
                  dex_date);
        }
      }
      zip.add("classes.dex", ByteSpan(dex.data(), dex.size()), dex_date);
      Bytes apk = zip.finish();

      PendingSample sample;
      sample.family = family.name;
      sample.true_family = family.name;
      sample.rel_path = "apks/" + family.name + "_" + std::to_string(i) + ".apk";
      sample.digest = sha256_hex(ByteSpan(apk.data(), apk.size()));
      sample.first_seen = first_seen;
      sample.dex_date = dex_date;
      sample.emit_av_labels = family.emit_av_labels;
      write_file(out_dir / sample.rel_path, ByteSpan(apk.data(), apk.size()));
      samples.push_back(std::move(sample));
    }

    // Ground truth for this family.
    nlohmann::json fam_truth;
    fam_truth["carriers"] = n;
    std::vector<std::string> rider_prints;
    std::set<std::string> categories;
    for (size_t m = 0; m < family.rider_methods.size(); ++m) {
      std::uint64_t serial = make_serial(MethodTag::kRider,
                                         static_cast<int>(fam_idx), 0,
                                         static_cast<int>(m));
      rider_prints.push_back(
          probe_fingerprint(serial, spec.seed, family.rider_methods[m].apis).hex());
      for (const std::string& api : family.rider_methods[m].apis) {
        for (const std::string& cat : taxonomy.api_categories(api)) {
          categories.insert(cat);
        }
      }
    }
    std::sort(rider_prints.begin(), rider_prints.end());
    fam_truth["rider_prints"] = rider_prints;
    fam_truth["rider_count"] = rider_prints.size();
    fam_truth["behavior_categories"] = categories;

    nlohmann::json variants = nlohmann::json::array();
    for (size_t v = 0; v < family.variants.size(); ++v) {
      std::vector<std::string> prints;
      for (size_t m = 0; m < family.variants[v].extra_rider_methods.size(); ++m) {
        std::uint64_t serial = make_serial(MethodTag::kVariant,
                                           static_cast<int>(fam_idx),
                                           static_cast<int>(v),
                                           static_cast<int>(m));
        prints.push_back(probe_fingerprint(
            serial, spec.seed, family.variants[v].extra_rider_methods[m].apis).hex());
      }
      std::sort(prints.begin(), prints.end());
      variants.push_back({{"fraction", family.variants[v].fraction},
                          {"prints", prints}});
    }
    if (!variants.empty()) fam_truth["variants"] = variants;

    std::vector<std::string> shared_prints;
    for (int m = 0; m < family.shared_library_methods; ++m) {
      std::uint64_t serial = make_serial(MethodTag::kSharedLib,
                                         static_cast<int>(fam_idx), 0, m);
      shared_prints.push_back(probe_fingerprint(serial, spec.seed, {}).hex());
    }
    std::sort(shared_prints.begin(), shared_prints.end());
    if (!shared_prints.empty()) fam_truth["shared_library_prints"] = shared_prints;

    nlohmann::json resources = nlohmann::json::array();
    for (const SynthResource& res : family.resources) {
      Bytes content = synth_detail::resource_bytes(res, family.name);
      resources.push_back({{"name", res.member_name},
                           {"kind", res.kind},
                           {"digest", sha256_hex(ByteSpan(content.data(), content.size()))},
                           {"count", res.count}});
    }
    if (!resources.empty()) fam_truth["resources"] = resources;
    fam_truth["clone_carriers"] = family.clone_carriers;
    truth["families"][family.name] = std::move(fam_truth);
  }

  // Label-noise injection: a family with noise floor(f * n) adopts that many
  // samples from the tail of the next family (cyclically), relabeling them.
  // Each noisy family ends up with exactly floor(f * n) of its members
  // replaced by foreigners; each family's tail is donated at most once.
  std::map<std::string, std::vector<size_t>> by_family;
  for (size_t i = 0; i < samples.size(); ++i) {
    by_family[samples[i].true_family].push_back(i);
  }
  for (size_t fam_idx = 0; fam_idx < spec.families.size(); ++fam_idx) {
    const SynthFamily& family = spec.families[fam_idx];
    if (family.label_noise <= 0 || spec.families.size() < 2) continue;
    int k = static_cast<int>(family.label_noise * family.carriers);
    const SynthFamily& donor = spec.families[(fam_idx + 1) % spec.families.size()];
    const auto& donor_samples = by_family[donor.name];
    for (int j = 0; j < k && j < static_cast<int>(donor_samples.size()); ++j) {
      samples[donor_samples[donor_samples.size() - 1 - static_cast<size_t>(j)]]
          .family = family.name;
    }
  }

  // Manifest, one record per line.
  std::string manifest;
  for (const PendingSample& s : samples) {
    nlohmann::json rec;
    rec["sha256"] = s.digest;
    rec["first_seen"] = format_utc(s.first_seen);
    rec["dex_date"] = format_utc(s.dex_date);
    rec["path"] = s.rel_path;
    if (s.emit_av_labels) {
      std::string cap = s.family;
      if (!cap.empty()) cap[0] = static_cast<char>(std::toupper(cap[0]));
      rec["av_labels"] = {{"ava", "Trojan.Android." + cap + ".x"},
                          {"avb", "Andr/" + cap + "-C"},
                          {"avc", "Adware." + cap}};
    } else {
      rec["family"] = s.family;
    }
    manifest += rec.dump();
    manifest += '\n';
  }
  SynthResult result;
  result.manifest_path = out_dir / "manifest.jsonl";
  result.ground_truth_path = out_dir / "ground_truth.json";
  result.samples_written = static_cast<int>(samples.size());
  write_file(result.manifest_path, manifest);
  write_file(result.ground_truth_path, truth.dump(2) + "\n");
  return result;
}

}  // namespace riderscope

#endif  // RIDERSCOPE_SYNTH_HPP_
