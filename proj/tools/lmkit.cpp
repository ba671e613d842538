// Copyright 2026 The lmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// lmkit command-line front end. One binary, one subcommand per module,
// one JSON report per run. Exit codes: 0 success, 1 domain error
// (reported in the JSON), 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lmkit/cehpo.hpp"
#include "lmkit/corpus.hpp"
#include "lmkit/posenc.hpp"
#include "lmkit/prflash.hpp"
#include "lmkit/report.hpp"
#include "lmkit/rng.hpp"
#include "lmkit/saq.hpp"
#include "lmkit/skipgram.hpp"
#include "lmkit/tokenizer.hpp"

namespace {

using lmkit::ReportDocument;
using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

void emit_report(const ReportDocument& report, const std::string& path) {
  if (path.empty())
    std::cout << report.serialize();
  else
    write_file(path, report.serialize());
}

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string out;     // subcommand artifact (vocab/tokens/CSV)
  std::string report;  // report path; stdout when empty
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "Run seed (default 0)")
      ->capture_default_str();
  cmd->add_option("--out", opts.out, "Artifact output path");
  cmd->add_option("--report", opts.report,
                  "Report path (stdout when omitted)");
}

// ---------------------------------------------------------------------------
// vocab
// ---------------------------------------------------------------------------

struct VocabOpts {
  CommonOpts common;
  std::string input;
  std::string algo = "swe";
  std::int64_t k = 0;
  std::string eow = "_";
  std::string merges_out;
};

int run_vocab(const VocabOpts& o, ReportDocument& report) {
  report.params = {{"input", o.input}, {"algo", o.algo},     {"k", o.k},
                   {"eow", o.eow},     {"seed", o.common.seed}};
  const lmkit::Corpus corpus = lmkit::load_corpus(read_file(o.input), o.eow[0]);
  const lmkit::CountTable table = lmkit::build_count_table(corpus);

  lmkit::Segmentation seg;
  lmkit::MergeList merges;
  const auto k = static_cast<std::size_t>(o.k);
  if (o.algo == "swe") {
    seg = lmkit::swe_optimal(corpus, table, k);
    merges.final_k = seg.k();
  } else if (o.algo == "ebpe") {
    std::tie(seg, merges) = lmkit::ebpe_train(corpus, table, k);
  } else {
    std::tie(seg, merges) = lmkit::bpe_train(corpus, k);
  }
  const lmkit::VocabStats stats = lmkit::vocab_stats(seg, corpus, table);

  if (!o.common.out.empty()) {
    std::ostringstream vocab;
    lmkit::write_vocab_file(vocab, stats);
    write_file(o.common.out, vocab.str());
  }
  if (!o.merges_out.empty()) {
    std::ostringstream out;
    lmkit::write_merge_file(out, merges);
    write_file(o.merges_out, out.str());
  }

  report.metrics = {{"words", corpus.word_count},
                    {"chars", corpus.total_chars()},
                    {"k_requested", o.k},
                    {"k_final", seg.k()},
                    {"path_cost", seg.cost},
                    {"unique_tokens", stats.u},
                    {"n_total", stats.n_total},
                    {"merges", merges.merges.size()}};
  return 0;
}

// ---------------------------------------------------------------------------
// tokenize
// ---------------------------------------------------------------------------

struct TokenizeOpts {
  CommonOpts common;
  std::string input;
  std::string merges_path;
  std::string eow = "_";
};

int run_tokenize(const TokenizeOpts& o, ReportDocument& report) {
  report.params = {{"input", o.input},
                   {"merges", o.merges_path},
                   {"eow", o.eow},
                   {"seed", o.common.seed}};
  std::istringstream merges_in(read_file(o.merges_path));
  const lmkit::MergeList merges = lmkit::read_merge_file(merges_in);
  const std::vector<std::string> tokens =
      lmkit::tokenize(read_file(o.input), merges, o.eow[0]);
  if (!o.common.out.empty()) {
    std::string joined;
    for (const std::string& t : tokens) {
      joined += t;
      joined += '\n';
    }
    write_file(o.common.out, joined);
  }
  report.metrics = {{"tokens", tokens.size()},
                    {"merges_applied", merges.merges.size()}};
  return 0;
}

// ---------------------------------------------------------------------------
// cehpo
// ---------------------------------------------------------------------------

struct CehpoOpts {
  CommonOpts common;
  std::string objective = "synthetic";
  std::string corpus_path;
  lmkit::HyperRanges ranges;
  lmkit::CehpoConfig config;
  bool eps_set = false;
  int sf_bins = 3;
  int opt_c = 2, opt_d = 2, opt_mc = 2, opt_sf_bin = 1;
  int epochs = 30;
  double learning_rate = 0.1;
};

int run_cehpo_cmd(const CehpoOpts& o_in, ReportDocument& report) {
  CehpoOpts o = o_in;
  o.config.seed = o.common.seed;
  if (!o.eps_set) o.config.eps_gamma = o.objective == "skipgram" ? 1e-4 : 1e-9;

  report.params = {{"objective", o.objective},
                   {"c_range", {o.ranges.c_min, o.ranges.c_max}},
                   {"d_range", {o.ranges.d_min, o.ranges.d_max}},
                   {"sf_range", {o.ranges.sf_min, o.ranges.sf_max}},
                   {"mc_range", {o.ranges.mc_min, o.ranges.mc_max}},
                   {"samples_per_round", o.config.samples_per_round},
                   {"rho", o.config.rho},
                   {"alpha", o.config.alpha},
                   {"favorability", o.config.favorability},
                   {"stall_rounds", o.config.stall_rounds},
                   {"max_rounds", o.config.max_rounds},
                   {"eps_gamma", o.config.eps_gamma},
                   {"seed", o.common.seed}};

  lmkit::Objective objective;
  lmkit::Corpus corpus;
  if (o.objective == "skipgram") {
    corpus = lmkit::load_corpus(read_file(o.corpus_path), '_');
    lmkit::SkipGramEvalConfig eval_cfg;
    eval_cfg.epochs = o.epochs;
    eval_cfg.learning_rate = o.learning_rate;
    objective = [&corpus, eval_cfg](const lmkit::HyperTuple& t,
                                    std::uint64_t seed) {
      return lmkit::skipgram_eval(corpus, t, seed, eval_cfg);
    };
  } else {
    lmkit::SyntheticObjective synthetic;
    synthetic.ranges = o.ranges;
    synthetic.sf_bins = o.sf_bins;
    synthetic.opt_c = o.opt_c;
    synthetic.opt_d = o.opt_d;
    synthetic.opt_mc = o.opt_mc;
    synthetic.opt_sf_bin = o.opt_sf_bin;
    objective = synthetic;
  }

  const auto [best, state] = lmkit::run_cehpo(objective, o.ranges, o.config);
  for (const lmkit::RoundRecord& r : state.log)
    report.rows.push_back(json{{"round", r.round},
                               {"gamma", r.gamma},
                               {"best_f", r.best_score},
                               {"best_c", r.best.window_c},
                               {"best_d", r.best.dim_d},
                               {"best_sf", r.best.subsample_sf},
                               {"best_mc", r.best.min_count_mc},
                               {"elite_draws", r.elite_draws}});
  report.metrics = {{"rounds", state.round},
                    {"best_f", state.log.back().best_score},
                    {"best_c", best.window_c},
                    {"best_d", best.dim_d},
                    {"best_sf", best.subsample_sf},
                    {"best_mc", best.min_count_mc}};
  return 0;
}

// ---------------------------------------------------------------------------
// posenc
// ---------------------------------------------------------------------------

struct PosencOpts {
  CommonOpts common;
  std::string mode = "harmonic";
  int heads = 8;
  int head = 0;
  int position = 4;  // the 1-indexed query position i
  double slope = 0.5;
  int dim = 8;
  int len = 8;
  int rope_pos = 1;
  double base = 10000.0;
};

std::string csv_of_vector(const std::vector<double>& values) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i)
    out << (i ? "," : "") << values[i];
  out << "\n";
  return out.str();
}

std::string csv_of_matrix(const lmkit::Matrix& m) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c)
      out << (c ? "," : "") << m(r, c);
    out << "\n";
  }
  return out.str();
}

int run_posenc(const PosencOpts& o, ReportDocument& report) {
  report.params = {{"mode", o.mode},     {"heads", o.heads},
                   {"head", o.head},     {"i", o.position},
                   {"slope", o.slope},   {"dim", o.dim},
                   {"len", o.len},       {"pos", o.rope_pos},
                   {"base", o.base},     {"seed", o.common.seed}};
  std::string artifact;
  if (o.mode == "slopes") {
    const auto slopes = lmkit::alibi_slopes(o.heads);
    artifact = csv_of_vector(slopes);
    report.metrics = {{"heads", o.heads},
                      {"first_slope", slopes.front()},
                      {"last_slope", slopes.back()}};
  } else if (o.mode == "alibi" || o.mode == "harmonic") {
    const auto bias = o.mode == "alibi"
                          ? lmkit::alibi_bias(o.position, o.slope)
                          : lmkit::harmonic_bias(o.position, o.slope);
    artifact = csv_of_vector(bias);
    report.metrics = {{"i", o.position},
                      {"entries", bias.size()},
                      {"first", bias.front()},
                      {"last", bias.back()}};
  } else if (o.mode == "harmonic-sum") {
    const double sum = lmkit::harmonic_factor_sum(o.position);
    const double closed =
        static_cast<double>(o.position) / (o.position + 1.0);
    report.metrics = {{"i", o.position},
                      {"sum", sum},
                      {"closed_form", closed},
                      {"abs_error", std::abs(sum - closed)}};
  } else if (o.mode == "rope") {
    lmkit::Rng rng(lmkit::derive_seed(o.common.seed, "posenc/inputs"));
    std::vector<double> x(static_cast<std::size_t>(o.dim));
    for (double& v : x) v = rng.gaussian();
    const auto y = lmkit::rope_apply(x, o.rope_pos, o.base);
    artifact = csv_of_vector(x) + csv_of_vector(y);
    double nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      nx += x[i] * x[i];
      ny += y[i] * y[i];
    }
    report.metrics = {{"pos", o.rope_pos},
                      {"norm_before", std::sqrt(nx)},
                      {"norm_after", std::sqrt(ny)}};
  } else {  // factored
    lmkit::Rng rng(lmkit::derive_seed(o.common.seed, "posenc/inputs"));
    lmkit::AttentionInputs inputs;
    inputs.Q = lmkit::Matrix::gaussian(static_cast<std::size_t>(o.len),
                                       static_cast<std::size_t>(o.dim), rng);
    inputs.K = lmkit::Matrix::gaussian(static_cast<std::size_t>(o.len),
                                       static_cast<std::size_t>(o.dim), rng);
    inputs.V = lmkit::Matrix::gaussian(static_cast<std::size_t>(o.len),
                                       static_cast<std::size_t>(o.dim), rng);
    const lmkit::Matrix weights =
        lmkit::factored_scores(inputs, lmkit::alibi_slopes(o.heads), o.head,
                               o.base);
    artifact = csv_of_matrix(weights);
    double worst = 0.0;
    for (std::size_t r = 0; r < weights.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < weights.cols(); ++c) sum += weights(r, c);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    report.metrics = {{"len", o.len},
                      {"head", o.head},
                      {"max_row_sum_deviation", worst}};
  }
  if (!o.common.out.empty() && !artifact.empty())
    write_file(o.common.out, artifact);
  return 0;
}

// ---------------------------------------------------------------------------
// prflash
// ---------------------------------------------------------------------------

struct PrflashOpts {
  CommonOpts common;
  std::int64_t n = 256;
  std::int64_t block = 32;
  std::int64_t cutoff = 2;
  double weight = 0.5;
  double drop_pct = 30.0;
  std::int64_t dim = 16;
};

int run_prflash(const PrflashOpts& o, ReportDocument& report) {
  lmkit::BlockProbModel model;
  model.context_len = static_cast<std::size_t>(o.n);
  model.block_rows = static_cast<std::size_t>(o.block);
  model.block_cols = static_cast<std::size_t>(o.block);
  model.cutoff = static_cast<std::size_t>(o.cutoff);

  lmkit::SelectionParams params;
  params.weight = o.weight;
  params.target_drop_pct = o.drop_pct;
  params.seed = o.common.seed;

  report.params = {{"n", o.n},
                   {"block_r", model.block_rows},
                   {"block_c", model.block_cols},
                   {"k", o.cutoff},
                   {"w", o.weight},
                   {"s", o.drop_pct},
                   {"dim", o.dim},
                   {"seed", o.common.seed}};

  const lmkit::BlockMask mask = lmkit::build_mask(model, params);

  lmkit::Rng rng(lmkit::derive_seed(o.common.seed, "prflash/qkv"));
  const auto n = static_cast<std::size_t>(o.n);
  const auto d = static_cast<std::size_t>(o.dim);
  const lmkit::Matrix Q = lmkit::Matrix::gaussian(n, d, rng);
  const lmkit::Matrix K = lmkit::Matrix::gaussian(n, d, rng);
  const lmkit::Matrix V = lmkit::Matrix::gaussian(n, d, rng);
  const auto [output, stats] = lmkit::masked_attention(
      Q, K, V, mask, model.block_rows, model.block_cols);

  if (!o.common.out.empty()) {
    std::ostringstream csv;
    for (std::size_t q = 0; q < mask.n_rows; ++q) {
      for (std::size_t c = 0; c < mask.n_cols; ++c)
        csv << (c ? "," : "") << (mask.keep(q, c) ? 1 : 0);
      csv << "\n";
    }
    write_file(o.common.out, csv.str());
  }

  report.metrics = {{"m_blocks", model.m_blocks()},
                    {"rows_kept", mask.kept_rows.size()},
                    {"cols_kept", mask.kept_cols.size()},
                    {"dropped_fraction", stats.dropped_fraction},
                    {"max_abs_error", stats.max_abs_error},
                    {"mean_abs_error", stats.mean_abs_error}};
  return 0;
}

// ---------------------------------------------------------------------------
// saq
// ---------------------------------------------------------------------------

struct SaqOpts {
  CommonOpts common;
  std::int64_t seq_len = 64;
  std::int64_t segment_size = 2;
  std::string bits = "16,8,4,2";
  std::int64_t group_size = 2;
  std::int64_t dim = 8;
  std::int64_t prefill_len = 0;
};

std::vector<int> parse_bits(const std::string& text) {
  std::vector<int> bits;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) bits.push_back(std::stoi(item));
  return bits;
}

int run_saq(const SaqOpts& o, ReportDocument& report) {
  lmkit::SAQParams params;
  params.segment_size = static_cast<std::size_t>(o.segment_size);
  params.bit_schedule = parse_bits(o.bits);
  params.group_size = static_cast<std::size_t>(o.group_size);
  params.dim = static_cast<std::size_t>(o.dim);

  report.params = {{"seq_len", o.seq_len},
                   {"segment_size", o.segment_size},
                   {"bits", o.bits},
                   {"group_size", o.group_size},
                   {"dim", o.dim},
                   {"prefill", o.prefill_len},
                   {"seed", o.common.seed}};

  const auto d = static_cast<std::size_t>(o.dim);
  const auto seq = static_cast<std::size_t>(o.seq_len);
  const auto prompt = static_cast<std::size_t>(o.prefill_len);
  lmkit::require(prompt < seq || (prompt == 0 && seq > 0),
                 lmkit::Errc::dimension_mismatch,
                 "prefill length must be shorter than the sequence");

  lmkit::Rng rng(lmkit::derive_seed(o.common.seed, "saq/embeddings"));
  const lmkit::Matrix x = lmkit::Matrix::gaussian(seq, d, rng);
  const lmkit::Projections proj =
      lmkit::Projections::seeded(d, o.common.seed);

  lmkit::KVCache cache = lmkit::empty_cache(params, proj);
  lmkit::Matrix k_exact(0, d), v_exact(0, d);
  if (prompt > 0) {
    auto result = lmkit::prefill(x.slice_rows(0, prompt), params, proj);
    cache = std::move(result.cache);
    k_exact = std::move(result.k_exact);
    v_exact = std::move(result.v_exact);
  }

  for (std::size_t step = prompt; step < seq; ++step) {
    lmkit::Matrix t(1, d);
    for (std::size_t c = 0; c < d; ++c) t(0, c) = x(step, c);
    k_exact.append_row(lmkit::matmul(t, proj.wk).row(0));
    v_exact.append_row(lmkit::matmul(t, proj.wv).row(0));
    const auto out = lmkit::decode_step(cache, x.row(step));
    const auto ref =
        lmkit::dense_mqa_output(k_exact, v_exact, lmkit::matmul(t, proj.wq).row(0));
    double max_err = 0.0, total = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double err = std::abs(out[c] - ref[c]);
      max_err = std::max(max_err, err);
      total += err;
    }
    report.rows.push_back(
        json{{"step", step},
             {"max_error", max_err},
             {"mean_error", total / static_cast<double>(d)},
             {"footprint_bits", lmkit::cache_footprint(cache)}});
  }

  report.metrics = {
      {"tokens_seen", cache.tokens_seen},
      {"footprint_bits", lmkit::cache_footprint(cache)},
      {"full_precision_bits",
       static_cast<std::uint64_t>(cache.tokens_seen) * d * 16 * 2},
      {"key_segments", cache.key_segments.size()},
      {"value_segments", cache.value_segments.size()}};
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lmkit: tokenization, hyperparameter search, positional "
               "biases, block-sparse attention and KV-cache quantization"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value configuration file");

  VocabOpts vocab;
  CLI::App* vocab_cmd =
      app.add_subcommand("vocab", "Learn a subword vocabulary");
  vocab_cmd->add_option("input", vocab.input, "UTF-8 corpus file")
      ->required();
  vocab_cmd->add_option("--algo", vocab.algo, "swe | ebpe | bpe")
      ->check(CLI::IsMember({"swe", "ebpe", "bpe"}))
      ->capture_default_str();
  vocab_cmd->add_option("--k", vocab.k, "Target token count")->required();
  vocab_cmd->add_option("--eow", vocab.eow, "End-of-word mark")
      ->check(CLI::Validator(
          [](std::string& v) {
            return v.size() == 1 ? std::string{}
                                 : std::string{"must be one character"};
          },
          "CHAR"))
      ->capture_default_str();
  vocab_cmd->add_option("--merges-out", vocab.merges_out,
                        "Merge list output path (ebpe/bpe)");
  add_common(vocab_cmd, vocab.common);

  TokenizeOpts tok;
  CLI::App* tok_cmd =
      app.add_subcommand("tokenize", "Apply a learned merge list");
  tok_cmd->add_option("input", tok.input, "UTF-8 text file")->required();
  tok_cmd->add_option("--merges", tok.merges_path, "Merge list file")
      ->required();
  tok_cmd->add_option("--eow", tok.eow, "End-of-word mark")
      ->check(CLI::Validator(
          [](std::string& v) {
            return v.size() == 1 ? std::string{}
                                 : std::string{"must be one character"};
          },
          "CHAR"))
      ->capture_default_str();
  add_common(tok_cmd, tok.common);

  CehpoOpts ce;
  CLI::App* ce_cmd = app.add_subcommand(
      "cehpo", "Cross-entropy hyperparameter optimization");
  ce_cmd->add_option("--objective", ce.objective, "synthetic | skipgram")
      ->check(CLI::IsMember({"synthetic", "skipgram"}))
      ->capture_default_str();
  ce_cmd->add_option("--corpus", ce.corpus_path,
                     "Corpus file (skipgram objective)");
  ce_cmd->add_option("--c-min", ce.ranges.c_min)->capture_default_str();
  ce_cmd->add_option("--c-max", ce.ranges.c_max)->capture_default_str();
  ce_cmd->add_option("--d-min", ce.ranges.d_min)->capture_default_str();
  ce_cmd->add_option("--d-max", ce.ranges.d_max)->capture_default_str();
  ce_cmd->add_option("--sf-min", ce.ranges.sf_min)->capture_default_str();
  ce_cmd->add_option("--sf-max", ce.ranges.sf_max)->capture_default_str();
  ce_cmd->add_option("--mc-min", ce.ranges.mc_min)->capture_default_str();
  ce_cmd->add_option("--mc-max", ce.ranges.mc_max)->capture_default_str();
  ce_cmd->add_option("--samples", ce.config.samples_per_round,
                     "Samples per round (M)")
      ->capture_default_str();
  ce_cmd->add_option("--rho", ce.config.rho)->capture_default_str();
  ce_cmd->add_option("--alpha", ce.config.alpha)->capture_default_str();
  ce_cmd->add_option("--favorability", ce.config.favorability,
                     "Elite favorability factor (s)")
      ->capture_default_str();
  ce_cmd->add_option("--stall-rounds", ce.config.stall_rounds,
                     "Stop after this many flat-gamma rounds (l)")
      ->capture_default_str();
  ce_cmd->add_option("--max-rounds", ce.config.max_rounds)
      ->capture_default_str();
  ce_cmd->add_option("--eps-gamma", ce.config.eps_gamma,
                     "Gamma equality tolerance")
      ->each([&ce](const std::string&) { ce.eps_set = true; });
  ce_cmd->add_option("--sf-bins", ce.sf_bins, "Synthetic s_f grid bins")
      ->capture_default_str();
  ce_cmd->add_option("--opt-c", ce.opt_c)->capture_default_str();
  ce_cmd->add_option("--opt-d", ce.opt_d)->capture_default_str();
  ce_cmd->add_option("--opt-mc", ce.opt_mc)->capture_default_str();
  ce_cmd->add_option("--opt-sf-bin", ce.opt_sf_bin)->capture_default_str();
  ce_cmd->add_option("--epochs", ce.epochs, "Skip-gram epochs")
      ->capture_default_str();
  ce_cmd->add_option("--lr", ce.learning_rate, "Skip-gram learning rate")
      ->capture_default_str();
  add_common(ce_cmd, ce.common);

  PosencOpts pe;
  CLI::App* pe_cmd =
      app.add_subcommand("posenc", "Positional bias and RoPE inspection");
  pe_cmd->add_option("--mode", pe.mode,
                     "slopes | alibi | harmonic | harmonic-sum | rope | "
                     "factored")
      ->check(CLI::IsMember({"slopes", "alibi", "harmonic", "harmonic-sum",
                             "rope", "factored"}))
      ->capture_default_str();
  pe_cmd->add_option("--heads", pe.heads)->capture_default_str();
  pe_cmd->add_option("--head", pe.head)->capture_default_str();
  pe_cmd->add_option("--i", pe.position, "Query position (1-indexed)")
      ->capture_default_str();
  pe_cmd->add_option("--slope", pe.slope)->capture_default_str();
  pe_cmd->add_option("--dim", pe.dim)->capture_default_str();
  pe_cmd->add_option("--len", pe.len)->capture_default_str();
  pe_cmd->add_option("--pos", pe.rope_pos, "RoPE position")
      ->capture_default_str();
  pe_cmd->add_option("--base", pe.base)->capture_default_str();
  add_common(pe_cmd, pe.common);

  PrflashOpts pf;
  CLI::App* pf_cmd = app.add_subcommand(
      "prflash", "Probabilistic block-sparse attention simulation");
  pf_cmd->add_option("--n", pf.n, "Context length")->capture_default_str();
  pf_cmd->add_option("--block", pf.block, "Block size for Q and K")
      ->capture_default_str();
  pf_cmd->add_option("--k", pf.cutoff, "Full-probability distance cutoff")
      ->capture_default_str();
  pf_cmd->add_option("--w", pf.weight, "Probability/randomness weight")
      ->capture_default_str();
  pf_cmd->add_option("--s", pf.drop_pct, "Target dropping percentage")
      ->capture_default_str();
  pf_cmd->add_option("--dim", pf.dim)->capture_default_str();
  add_common(pf_cmd, pf.common);

  SaqOpts saq;
  CLI::App* saq_cmd =
      app.add_subcommand("saq", "Staircase KV-cache quantization sweep");
  saq_cmd->add_option("--seq-len", saq.seq_len)->capture_default_str();
  saq_cmd->add_option("--segment-size", saq.segment_size)
      ->capture_default_str();
  saq_cmd->add_option("--bits", saq.bits, "Comma-separated bit schedule")
      ->capture_default_str();
  saq_cmd->add_option("--group-size", saq.group_size)->capture_default_str();
  saq_cmd->add_option("--dim", saq.dim)->capture_default_str();
  saq_cmd->add_option("--prefill", saq.prefill_len,
                      "Tokens processed via prefill before decoding")
      ->capture_default_str();
  add_common(saq_cmd, saq.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ReportDocument report;
  const CommonOpts* common = nullptr;
  try {
    if (vocab_cmd->parsed()) {
      report.command = "vocab";
      common = &vocab.common;
      run_vocab(vocab, report);
    } else if (tok_cmd->parsed()) {
      report.command = "tokenize";
      common = &tok.common;
      run_tokenize(tok, report);
    } else if (ce_cmd->parsed()) {
      report.command = "cehpo";
      common = &ce.common;
      run_cehpo_cmd(ce, report);
    } else if (pe_cmd->parsed()) {
      report.command = "posenc";
      common = &pe.common;
      run_posenc(pe, report);
    } else if (pf_cmd->parsed()) {
      report.command = "prflash";
      common = &pf.common;
      run_prflash(pf, report);
    } else if (saq_cmd->parsed()) {
      report.command = "saq";
      common = &saq.common;
      run_saq(saq, report);
    }
    emit_report(report, common ? common->report : "");
    return 0;
  } catch (const lmkit::Error& e) {
    report.error = {{"name", e.name()}, {"message", e.what()}};
    emit_report(report, common ? common->report : "");
    return 1;
  } catch (const std::exception& e) {
    report.error = {{"name", "RuntimeError"}, {"message", e.what()}};
    emit_report(report, common ? common->report : "");
    return 1;
  }
}
