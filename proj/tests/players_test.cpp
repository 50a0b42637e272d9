#include <cmath>

#include <gtest/gtest.h>

#include "rgame/gradcheck.hpp"
#include "rgame/players.hpp"

using namespace rgame;

namespace {

PlayerParams tiny_players(bool introspective, std::uint64_t seed = 3, std::size_t vocab = 12,
                          std::size_t classes = 3) {
    Rng rng(seed);
    return make_player_params(EncoderDims{vocab, 4, 3}, classes, introspective, 0.3, rng);
}

}  // namespace

TEST(ApplyMask, FrozenExample) {
    const std::vector<std::size_t> tokens{5, 6, 7};
    const std::vector<int> z{1, 0, 1};
    const MaskedViews v = apply_mask(tokens, z);
    EXPECT_EQ(v.rationale, (std::vector<std::size_t>{5, kMaskTokenId, 7}));
    EXPECT_EQ(v.complement, (std::vector<std::size_t>{kMaskTokenId, 6, kMaskTokenId}));
}

TEST(ApplyMask, ViewsPartitionTheSequence) {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t L = 1 + rng.uniform_index(12);
        std::vector<std::size_t> tokens(L);
        std::vector<int> z(L);
        for (std::size_t i = 0; i < L; ++i) {
            tokens[i] = 2 + rng.uniform_index(40);
            z[i] = rng.bernoulli(0.5);
        }
        const MaskedViews v = apply_mask(tokens, z);
        for (std::size_t i = 0; i < L; ++i) {
            // each position appears unmasked in exactly one of the two views
            EXPECT_EQ(v.rationale[i] == kMaskTokenId, z[i] == 0);
            EXPECT_EQ(v.complement[i] == kMaskTokenId, z[i] == 1);
            EXPECT_EQ(z[i] ? v.rationale[i] : v.complement[i], tokens[i]);
        }
    }
}

TEST(ApplyMask, LengthMismatchThrows) {
    EXPECT_THROW(apply_mask(std::vector<std::size_t>{1, 2}, std::vector<int>{1}), ShapeError);
}

TEST(MaskStats, CountsAndTransitions) {
    const std::vector<int> z{1, 0, 1};
    EXPECT_EQ(selected_count(z), 2u);
    EXPECT_EQ(transition_count(z), 3u);
    EXPECT_EQ(piece_count(z), 2u);
    const std::vector<int> run{0, 1, 1, 1, 0};
    EXPECT_EQ(transition_count(run), 2u);
    EXPECT_EQ(piece_count(run), 1u);
    const std::vector<int> edge{1, 1, 0, 0, 0};
    EXPECT_EQ(transition_count(edge), 2u);
    const std::vector<int> none{0, 0, 0};
    EXPECT_EQ(transition_count(none), 0u);
    EXPECT_EQ(piece_count(none), 0u);
}

TEST(Generator, ZeroHeadGivesHalfProbs) {
    PlayerParams pp = tiny_players(false);
    pp.generator.value("zhead.w").fill(0.0);
    pp.generator.value("zhead.b").fill(0.0);
    const std::vector<std::size_t> toks{2, 7, 4, 9};
    const GeneratorTrace t = generator_forward(toks, pp.generator);
    for (double p : t.probs) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(Generator, ProbsAreSigmoidOfScores) {
    const PlayerParams pp = tiny_players(false);
    const GeneratorTrace t = generator_forward(std::vector<std::size_t>{3, 5, 8}, pp.generator);
    for (std::size_t i = 0; i < t.probs.size(); ++i) {
        EXPECT_NEAR(t.probs[i], 1.0 / (1.0 + std::exp(-t.scores[i])), 1e-15);
        EXPECT_GT(t.probs[i], 0.0);
        EXPECT_LT(t.probs[i], 1.0);
    }
}

TEST(Introspective, ZeroLabelEmbeddingEqualsPlain) {
    PlayerParams pp = tiny_players(true);
    pp.generator.value("label_embed").fill(0.0);
    const std::vector<std::size_t> toks{2, 7, 4, 9, 11};
    const GeneratorTrace plain = generator_forward(toks, pp.generator);
    for (std::size_t label = 0; label < 3; ++label) {
        const GeneratorTrace cond = introspective_forward(toks, label, pp.generator);
        ASSERT_EQ(cond.probs.size(), plain.probs.size());
        for (std::size_t i = 0; i < plain.probs.size(); ++i) {
            EXPECT_EQ(cond.probs[i], plain.probs[i]);
        }
    }
}

TEST(Introspective, DifferentLabelsChangeProbs) {
    const PlayerParams pp = tiny_players(true);
    const std::vector<std::size_t> toks{2, 7, 4};
    const GeneratorTrace a = introspective_forward(toks, 0, pp.generator);
    const GeneratorTrace b = introspective_forward(toks, 1, pp.generator);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.probs.size(); ++i) diff += std::abs(a.probs[i] - b.probs[i]);
    EXPECT_GT(diff, 1e-9);
}

TEST(Introspective, LabelOutOfRangeThrows) {
    const PlayerParams pp = tiny_players(true);
    EXPECT_THROW(introspective_forward(std::vector<std::size_t>{2, 3}, 3, pp.generator), LabelError);
}

TEST(IntrospectLabel, ArgmaxTiesPickLowest) {
    PlayerParams pp = tiny_players(true);
    // zero the whole classifier: logits all equal, so every class ties
    for (auto& [name, t] : pp.introspection.values) t.fill(0.0);
    EXPECT_EQ(introspect_label(std::vector<std::size_t>{2, 3, 4}, pp.introspection), 0u);
}

TEST(SampleMask, DeterministicGivenSeedAndBounded) {
    Rng a(9), b(9);
    const Vec probs{0.1, 0.9, 0.5, 0.3};
    const SampledMask ma = sample_mask(probs, 0.05, a);
    const SampledMask mb = sample_mask(probs, 0.05, b);
    EXPECT_EQ(ma.z, mb.z);
    EXPECT_DOUBLE_EQ(ma.log_likelihood, mb.log_likelihood);
    EXPECT_LE(ma.log_likelihood, 0.0);
    EXPECT_TRUE(std::isfinite(ma.log_likelihood));
}

TEST(SampleMask, SaturatedProbsStayFinite) {
    Rng rng(4);
    const Vec probs{1.0, 0.0, 1.0};
    for (int i = 0; i < 20; ++i) {
        const SampledMask m = sample_mask(probs, 0.5, rng);  // exploration forces disagreement
        EXPECT_TRUE(std::isfinite(m.log_likelihood));
    }
}

TEST(SampleMask, ExplorationMixesTowardHalf) {
    // with probs pinned at 0 and full exploration, ones still appear ~half the time
    Rng rng(8);
    const Vec probs(1, 0.0);
    int ones = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) ones += sample_mask(probs, 1.0, rng).z[0];
    EXPECT_NEAR(static_cast<double>(ones) / n, 0.5, 0.02);
    // with zero exploration they never do
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_mask(probs, 0.0, rng).z[0], 0);
}

TEST(SampleMask, RateMatchesSmoothedPolicy) {
    Rng rng(12);
    const Vec probs(1, 0.8);
    const double explore = 0.1;
    int ones = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) ones += sample_mask(probs, explore, rng).z[0];
    EXPECT_NEAR(static_cast<double>(ones) / n, 0.9 * 0.8 + 0.1 * 0.5, 0.01);
}

TEST(InferMask, StrictThreshold) {
    GameConfig cfg;
    cfg.threshold = 0.5;
    const Vec probs{0.4, 0.6, 0.5};
    EXPECT_EQ(infer_mask(probs, cfg), (std::vector<int>{0, 1, 0}));
}

TEST(InferMask, MonotoneInProbs) {
    GameConfig cfg;
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        Vec lo(6), hi(6);
        for (std::size_t i = 0; i < 6; ++i) {
            lo[i] = rng.uniform01();
            hi[i] = lo[i] + (1.0 - lo[i]) * rng.uniform01();
        }
        const auto zlo = infer_mask(lo, cfg);
        const auto zhi = infer_mask(hi, cfg);
        for (std::size_t i = 0; i < 6; ++i) EXPECT_LE(zlo[i], zhi[i]);
    }
}

TEST(TopkMask, SelectsHighestWithStableTies) {
    const Vec probs{0.2, 0.9, 0.5, 0.5, 0.1};
    const auto z = topk_mask(probs, 0.4);  // ceil(0.4 * 5) = 2
    EXPECT_EQ(z, (std::vector<int>{0, 1, 1, 0, 0}));
}

TEST(Generator, PolicyGradientPassesGradCheck) {
    PlayerParams pp = tiny_players(true, 41);
    const std::vector<std::size_t> toks{2, 7, 4, 9, 3, 11};
    const std::vector<int> z{1, 0, 0, 1, 1, 0};
    const std::size_t label = 2;
    auto loglik = [&](const GeneratorTrace& t) {
        double ll = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double p = std::min(1.0 - 1e-6, std::max(1e-6, t.probs[i]));
            ll += z[i] ? std::log(p) : std::log(1.0 - p);
        }
        return ll;
    };
    auto loss = [&]() {
        return -loglik(introspective_forward(toks, label, pp.generator));
    };
    auto grad = [&]() {
        const GeneratorTrace t = introspective_forward(toks, label, pp.generator);
        Vec dscores(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            dscores[i] = -(static_cast<double>(z[i]) - t.probs[i]);
        }
        generator_backward(t, pp.generator, dscores);
    };
    Rng pick(5);
    const GradCheckReport rep = grad_check(loss, grad, pp.generator, 1e-4, pick);
    EXPECT_LT(rep.max_rel_error, 1e-4) << "worst " << rep.worst_param << "[" << rep.worst_index << "]";
    // the label pathway must receive gradient: probe the conditioned row
    const GeneratorTrace t = introspective_forward(toks, label, pp.generator);
    Vec dscores(z.size(), 1.0);
    pp.generator.zero_grads();
    generator_backward(t, pp.generator, dscores);
    double row_grad = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        row_grad += std::abs(pp.generator.grad("label_embed").at(label, k));
    }
    EXPECT_GT(row_grad, 1e-9);
}

TEST(Classifier, FullGraphPassesGradCheck) {
    PlayerParams pp = tiny_players(false, 43);
    const std::vector<std::size_t> toks{2, 0, 4, 0, 3};  // masked view with holes
    const std::size_t label = 1;
    auto loss = [&]() {
        const ClassifierTrace t = classifier_forward(toks, pp.predictor);
        return softmax_xent(t.logits, label).loss;
    };
    auto grad = [&]() {
        const ClassifierTrace t = classifier_forward(toks, pp.predictor);
        const XentResult x = softmax_xent(t.logits, label);
        classifier_backward(t, pp.predictor, x.dlogits);
    };
    Rng pick(6);
    const GradCheckReport rep = grad_check(loss, grad, pp.predictor, 1e-4, pick);
    EXPECT_LT(rep.max_rel_error, 1e-4) << "worst " << rep.worst_param << "[" << rep.worst_index << "]";
}

TEST(Classifier, AllMaskedInputIgnoresOriginalTokens) {
    const PlayerParams pp = tiny_players(false);
    const std::vector<int> zeros(4, 0);
    const MaskedViews a = apply_mask(std::vector<std::size_t>{2, 3, 4, 5}, zeros);
    const MaskedViews b = apply_mask(std::vector<std::size_t>{9, 8, 7, 6}, zeros);
    const ClassifierTrace ta = classifier_forward(a.rationale, pp.predictor);
    const ClassifierTrace tb = classifier_forward(b.rationale, pp.predictor);
    for (std::size_t i = 0; i < ta.probs.size(); ++i) EXPECT_EQ(ta.probs[i], tb.probs[i]);
}
