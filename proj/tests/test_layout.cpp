#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "eyeline/layout/config_json.hpp"
#include "eyeline/layout/focus.hpp"
#include "eyeline/layout/frame.hpp"
#include "eyeline/layout/frame_json.hpp"
#include "eyeline/layout/grid.hpp"
#include "eyeline/layout/scene.hpp"
#include "eyeline/layout/share.hpp"
#include "eyeline/layout/timeline.hpp"

using namespace eyeline;
using namespace eyeline::layout;

namespace {

std::vector<ClientId> ids(int n) {
    std::vector<ClientId> v;
    for (int i = 0; i < n; ++i) v.emplace_back("m" + std::to_string(i));
    return v;
}

bool rects_overlap_brute(const Rect& a, const Rect& b) {
    return !(a.right() <= b.x || b.right() <= a.x || a.bottom() <= b.y || b.bottom() <= a.y);
}

EdgeTimeline steady(const EdgeMap& edges, TimeMs from, TimeMs to) {
    EdgeTimeline tl;
    for (TimeMs t = from; t <= to; t += 16) tl = update_timeline(tl, edges, t, {});
    return tl;
}

} // namespace

// --- grid --------------------------------------------------------------------

TEST(Grid, FiveMembersIsThreePlusTwo) {
    const auto m = ids(5);
    const auto l = compute_tile_layout(m, m[0], 1920, 1080);
    ASSERT_EQ(l.tiles.size(), 5u);
    EXPECT_EQ(l.tiles[0].rect.y, l.tiles[2].rect.y);
    EXPECT_GT(l.tiles[3].rect.y, l.tiles[0].rect.y);
    EXPECT_EQ(l.tiles[3].rect.y, l.tiles[4].rect.y);
    EXPECT_GT(min_tile_gap(l), 0.0);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(l.tiles[i].owner, m[i]);
}

TEST(Grid, Deterministic) {
    const auto m = ids(7);
    EXPECT_EQ(compute_tile_layout(m, m[2], 1600, 900), compute_tile_layout(m, m[2], 1600, 900));
}

TEST(Grid, ExcludingViewerDropsItsTile) {
    const auto m = ids(4);
    GridConfig cfg;
    cfg.include_viewer = false;
    const auto l = compute_tile_layout(m, m[1], 1920, 1080, cfg);
    EXPECT_EQ(l.tiles.size(), 3u);
    EXPECT_EQ(l.find(m[1]), nullptr);
}

TEST(Grid, TooSmallScreenIsInfeasible) {
    const auto m = ids(12);
    EXPECT_THROW(compute_tile_layout(m, m[0], 300, 200), LayoutInfeasible);
}

TEST(Grid, PreconditionsChecked) {
    const auto one = ids(1);
    EXPECT_THROW(compute_tile_layout(one, one[0], 1920, 1080), ConfigError);
    std::vector<ClientId> dup{ClientId("a"), ClientId("a")};
    EXPECT_THROW(compute_tile_layout(dup, dup[0], 1920, 1080), ConfigError);
}

TEST(Grid, RandomLayoutsDisjointByBruteForce) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> nm(2, 12);
    std::uniform_real_distribution<double> sw(320, 3840), sh(240, 2160);
    int checked = 0;
    for (int iter = 0; iter < 2000; ++iter) {
        const auto m = ids(nm(rng));
        TileLayout l;
        try {
            l = compute_tile_layout(m, m[0], sw(rng), sh(rng));
        } catch (const LayoutInfeasible&) {
            continue;
        }
        ++checked;
        for (std::size_t i = 0; i < l.tiles.size(); ++i) {
            const auto& r = l.tiles[i].rect;
            ASSERT_GE(r.x, 0.0);
            ASSERT_GE(r.y, 0.0);
            ASSERT_LE(r.right(), l.screen_w + 1e-9);
            ASSERT_LE(r.bottom(), l.screen_h + 1e-9);
            for (std::size_t j = i + 1; j < l.tiles.size(); ++j)
                ASSERT_FALSE(rects_overlap_brute(r, l.tiles[j].rect));
        }
    }
    EXPECT_GT(checked, 1000);
}

// --- envelope ------------------------------------------------------------------

TEST(Envelope, Basics) {
    EXPECT_DOUBLE_EQ(opacity_envelope(0, std::nullopt, 300, 300), 0.0);
    EXPECT_DOUBLE_EQ(opacity_envelope(300, std::nullopt, 300, 300), 1.0);
    EXPECT_DOUBLE_EQ(opacity_envelope(5000, std::nullopt, 300, 300), 1.0);
    EXPECT_DOUBLE_EQ(opacity_envelope(150, std::nullopt, 300, 300), 0.5);
    EXPECT_DOUBLE_EQ(opacity_envelope(600, 150.0, 300, 300), 0.5);
    EXPECT_DOUBLE_EQ(opacity_envelope(150, 150.0, 300, 300), 0.25);
    EXPECT_DOUBLE_EQ(opacity_envelope(600, 300.0, 300, 300), 0.0);
    EXPECT_THROW(opacity_envelope(1, std::nullopt, 0, 300), ConfigError);
}

TEST(Envelope, ContinuousAcrossStartStopAndResume) {
    EnvelopeConfig env;
    const ClientId a("a"), b("b"), c("c");
    std::mt19937_64 rng(5);
    EdgeTimeline tl;
    double prev = 0.0;
    OptClient target;
    for (TimeMs t = 0; t < 20000; t += 16) {
        if (rng() % 9 == 0) target = (rng() % 2) ? OptClient{b} : OptClient{c};
        if (rng() % 13 == 0) target.reset();
        tl = update_timeline(tl, EdgeMap{{a, target}}, t, env);
        const auto* tr = tl.find(a, b);
        const double o = tr ? tr->opacity(t, env) : 0.0;
        ASSERT_GE(o, 0.0);
        ASSERT_LE(o, 1.0);
        ASSERT_LE(std::abs(o - prev), 16.0 / env.fade_in_ms + 1e-12) << t;
        prev = o;
    }
}

// --- directional ---------------------------------------------------------------

TEST(Directional, NoEdgesNoDirectives) {
    const auto m = ids(5);
    const auto l = compute_tile_layout(m, m[0], 1920, 1080);
    const auto f = directional_frame(m[0], {}, l, 1000, {});
    EXPECT_TRUE(f.arrows.empty());
    EXPECT_TRUE(f.glows.empty());
    EXPECT_TRUE(f.poses.empty());
    EXPECT_EQ(f.mic_icons.size(), 5u);
}

TEST(Directional, GazeAtViewerIsFullGlow) {
    const auto m = ids(5);
    const auto l = compute_tile_layout(m, m[0], 1920, 1080);
    const auto tl = steady({{m[1], m[0]}}, 0, 640);
    const auto f = directional_frame(m[0], tl, l, 640, {});
    ASSERT_EQ(f.glows.size(), 1u);
    EXPECT_EQ(f.glows[0].tile, m[1]);
    EXPECT_DOUBLE_EQ(f.glows[0].intensity, 1.0);
    EXPECT_TRUE(f.arrows.empty());
}

TEST(Directional, ArrowsMeetTargetAtNearestBorderPoints) {
    const auto m = ids(5); // m0 = A, m4 = viewer
    const auto l = compute_tile_layout(m, m[4], 1920, 1080);
    const auto tl = steady({{m[1], m[0]}, {m[2], m[0]}, {m[3], m[0]}}, 0, 640);
    const auto f = directional_frame(m[4], tl, l, 640, {});
    ASSERT_EQ(f.arrows.size(), 3u);
    EXPECT_TRUE(f.glows.empty());

    const Rect& target = l.find(m[0])->rect;
    for (const auto& a : f.arrows) {
        EXPECT_EQ(a.target, m[0]);
        EXPECT_DOUBLE_EQ(a.opacity, 1.0);
        const Rect& src = l.find(a.source)->rect;
        // brute force: dense sampling of both borders
        auto border = [](const Rect& r, int n) {
            std::vector<Point> pts;
            for (int i = 0; i <= n; ++i) {
                const double u = static_cast<double>(i) / n;
                pts.push_back({r.x + u * r.w, r.y});
                pts.push_back({r.x + u * r.w, r.bottom()});
                pts.push_back({r.x, r.y + u * r.h});
                pts.push_back({r.right(), r.y + u * r.h});
            }
            return pts;
        };
        double best = 1e300;
        for (const auto& p : border(src, 400))
            for (const auto& q : border(target, 400)) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
        const double len = std::hypot(a.to.x - a.from.x, a.to.y - a.from.y);
        // sampled minimum bounds the true minimum from above, within one sample step
        const double step = std::max({src.w, src.h, target.w, target.h}) / 400.0;
        EXPECT_LE(len, best + 1e-9);
        EXPECT_GE(len, best - step);
        auto on_border = [](const Rect& r, Point p) {
            const bool in = p.x >= r.x - 1e-9 && p.x <= r.right() + 1e-9 && p.y >= r.y - 1e-9 &&
                            p.y <= r.bottom() + 1e-9;
            const bool edge = std::abs(p.x - r.x) < 1e-9 || std::abs(p.x - r.right()) < 1e-9 ||
                              std::abs(p.y - r.y) < 1e-9 || std::abs(p.y - r.bottom()) < 1e-9;
            return in && edge;
        };
        EXPECT_TRUE(on_border(src, a.from));
        EXPECT_TRUE(on_border(target, a.to));
    }
}

TEST(Directional, ViewerWithoutTileDropsOwnArrows) {
    const auto m = ids(4);
    GridConfig g;
    g.include_viewer = false;
    const auto l = compute_tile_layout(m, m[0], 1920, 1080, g);
    const auto tl = steady({{m[0], m[1]}, {m[2], m[3]}, {m[3], m[0]}}, 0, 320);
    FrameDiagnostics d;
    const auto f = directional_frame(m[0], tl, l, 320, {}, {}, &d);
    ASSERT_EQ(f.arrows.size(), 1u);
    EXPECT_EQ(f.arrows[0].source, m[2]);
    ASSERT_EQ(f.glows.size(), 1u);
    EXPECT_EQ(d.skipped_edges, 0u);
}

TEST(Directional, UnknownMemberSkipped) {
    const auto m = ids(3);
    const auto l = compute_tile_layout(m, m[0], 1920, 1080);
    const auto tl = steady({{m[1], ClientId("ghost")}}, 0, 100);
    FrameDiagnostics d;
    const auto f = directional_frame(m[0], tl, l, 100, {}, {}, &d);
    EXPECT_TRUE(f.arrows.empty());
    EXPECT_EQ(d.skipped_edges, 1u);
}

TEST(Directional, EndedEdgeFadesOut) {
    const auto m = ids(3);
    const auto l = compute_tile_layout(m, m[0], 1920, 1080);
    auto tl = steady({{m[1], m[2]}}, 0, 640);
    tl = update_timeline(tl, {{m[1], std::nullopt}}, 656, {});
    auto f = directional_frame(m[0], tl, l, 656 + 150, {});
    ASSERT_EQ(f.arrows.size(), 1u);
    EXPECT_DOUBLE_EQ(f.arrows[0].opacity, 0.5);
    tl = update_timeline(tl, {{m[1], std::nullopt}}, 656 + 300, {});
    f = directional_frame(m[0], tl, l, 656 + 300, {});
    EXPECT_TRUE(f.arrows.empty());
}

// --- perspective ---------------------------------------------------------------

TEST(YawToward, Cases) {
    EXPECT_DOUBLE_EQ(yaw_toward({100, 100}, {100, 500}, 30, 1000), 0.0);
    EXPECT_DOUBLE_EQ(yaw_toward({100, 100}, {100, 100}, 30, 1000), 0.0);
    EXPECT_DOUBLE_EQ(yaw_toward({0, 0}, {1000, 0}, 30, 1000), 30.0);
    EXPECT_DOUBLE_EQ(yaw_toward({1000, 0}, {0, 0}, 30, 1000), -30.0);
    EXPECT_DOUBLE_EQ(yaw_toward({0, 0}, {5000, 0}, 30, 1000), 30.0);
    for (double dx : {37.0, 250.0, 499.5, 800.0}) {
        EXPECT_DOUBLE_EQ(yaw_toward({10, 0}, {10 + dx, 50}, 30, 1000), 30.0 * dx / 1000.0);
        EXPECT_DOUBLE_EQ(yaw_toward({10 + dx, 0}, {10, 50}, 30, 1000), -30.0 * dx / 1000.0);
    }
}

TEST(Perspective, RestWithoutEdges) {
    const auto m = ids(4);
    const auto l = compute_tile_layout(m, m[0], 1920, 1080);
    auto r = perspective_frame(m[0], {}, l, 16, {}, {}, {});
    ASSERT_EQ(r.frame.poses.size(), 4u);
    for (const auto& p : r.frame.poses) {
        EXPECT_EQ(p.yaw, 0.0);
        EXPECT_EQ(p.shake, 0.0);
    }
    EXPECT_TRUE(r.frame.arrows.empty());
    EXPECT_TRUE(r.frame.glows.empty());
}

TEST(Perspective, GazeAtViewerFacesForwardAndShakes) {
    const auto m = ids(4);
    const auto l = compute_tile_layout(m, m[0], 1920, 1080);
    PerspectiveConfig cfg;
    PoseState ps;
    EdgeTimeline tl;
    RenderFrame last;
    double max_abs_shake = 0.0;
    for (TimeMs t = 0; t <= 2000; t += 16) {
        tl = update_timeline(tl, {{m[1], m[0]}}, t, {});
        auto r = perspective_frame(m[0], tl, l, t, ps, cfg, {});
        ps = r.poses;
        last = r.frame;
        for (const auto& p : r.frame.poses) {
            ASSERT_LE(std::abs(p.shake), cfg.max_shake);
            if (p.tile == m[1] && t > 400) max_abs_shake = std::max(max_abs_shake, std::abs(p.shake));
        }
    }
    const auto& pa = last.poses[1];
    EXPECT_EQ(pa.tile, m[1]);
    EXPECT_EQ(pa.yaw, 0.0);
    EXPECT_GT(std::abs(pa.shake), 0.0);
    EXPECT_GT(max_abs_shake, 3.0);
}

TEST(Perspective, TurnTowardRightNeighbourFollowsRecurrence) {
    const auto m = ids(4); // 2x2 grid: m0 | m1 on the first row
    const auto l = compute_tile_layout(m, m[3], 1920, 1080);
    PerspectiveConfig cfg;
    const double goal = yaw_toward(l.find(m[0])->rect.center(), l.find(m[1])->rect.center(),
                                   cfg.max_yaw, yaw_span(l));
    ASSERT_GT(goal, 0.0);

    PoseState ps;
    EdgeTimeline tl;
    double y = 0.0;
    for (int n = 0; n < 100; ++n) {
        const TimeMs t = n * 16;
        tl = update_timeline(tl, {{m[0], m[1]}}, t, {});
        auto r = perspective_frame(m[3], tl, l, t, ps, cfg, {});
        ps = r.poses;
        // closed form of the exponential approach with y(0) = 0
        const double expect = goal * (1.0 - std::exp(-static_cast<double>(t) / cfg.pose_tau_ms));
        ASSERT_NEAR(r.frame.poses[0].yaw, expect, 1e-9) << n;
        ASSERT_GE(r.frame.poses[0].yaw, y);
        ASSERT_LE(r.frame.poses[0].yaw, goal);
        y = r.frame.poses[0].yaw;
    }
}

TEST(Perspective, InterpolationNeverOvershoots) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-30, 30), dt(0, 500);
    for (int i = 0; i < 10000; ++i) {
        const double cur = u(rng), goal = u(rng);
        const double next = interpolate_pose(cur, goal, dt(rng), 150);
        ASSERT_LE(std::abs(goal - next), std::abs(goal - cur) + 1e-12);
        ASSERT_GE((goal - cur) * (goal - next), -1e-12);
    }
}

// --- scene ---------------------------------------------------------------------

TEST(Scene, ModesPopulateOnlyTheirDirectives) {
    Scene scene;
    const auto m = ids(4);
    EdgeMap edges{{m[1], m[2]}, {m[2], m[0]}};
    AudioMap audio{{m[1], 0.9}};
    for (TimeMs t = 0; t < 1000; t += 16) scene.advance(m, edges, audio, t);

    PoseState ps;
    const auto b = scene.render(m[0], LayoutMode::baseline, ps);
    EXPECT_TRUE(b.arrows.empty() && b.glows.empty() && b.poses.empty());
    const auto d = scene.render(m[0], LayoutMode::directional, ps);
    EXPECT_EQ(d.arrows.size(), 1u);
    EXPECT_EQ(d.glows.size(), 1u);
    EXPECT_TRUE(d.poses.empty());
    const auto p = scene.render(m[0], LayoutMode::perspective, ps);
    EXPECT_TRUE(p.arrows.empty() && p.glows.empty());
    EXPECT_EQ(p.poses.size(), 4u);
    for (const auto* f : {&b, &d, &p}) {
        ASSERT_EQ(f->mic_icons.size(), 4u);
        EXPECT_TRUE(f->mic_icons[1].on);
        EXPECT_FALSE(f->mic_icons[0].on);
    }
}

TEST(Scene, SingleMemberRendersEmptyGeometry) {
    Scene scene;
    const auto m = ids(1);
    scene.advance(m, {}, {}, 0);
    PoseState ps;
    const auto f = scene.render(m[0], LayoutMode::directional, ps);
    EXPECT_TRUE(f.tile_geometry.tiles.empty());
}

TEST(Scene, BoundedDirectivesUnderRandomTraffic) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = ids(2 + static_cast<int>(rng() % 8));
        Scene scene;
        PoseState ps;
        for (TimeMs t = 0; t < 3000; t += 16) {
            EdgeMap edges;
            AudioMap audio;
            for (const auto& s : m) {
                const auto k = rng() % (m.size() + 1);
                edges[s] = k == m.size() ? OptClient{} : OptClient{m[k]};
                audio[s] = static_cast<double>(rng() % 1000) / 999.0;
            }
            scene.advance(m, edges, audio, t);
            for (auto mode : {LayoutMode::directional, LayoutMode::perspective}) {
                const auto f = scene.render(m[0], mode, ps);
                for (const auto& a : f.arrows) ASSERT_TRUE(a.opacity >= 0 && a.opacity <= 1);
                for (const auto& g : f.glows) ASSERT_TRUE(g.intensity >= 0 && g.intensity <= 1);
                for (const auto& p : f.poses) {
                    ASSERT_LE(std::abs(p.yaw), 30.0);
                    ASSERT_LE(std::abs(p.shake), 4.0);
                }
            }
        }
    }
}

// --- focus ---------------------------------------------------------------------

TEST(Focus, NoFocusLeavesLayoutUnchanged) {
    const auto m = ids(5);
    const auto base = compute_tile_layout(m, m[0], 1920, 1080);
    auto ledger = make_focus_ledger(base);
    const auto before = apply_focus(base, ledger);
    for (int i = 0; i < 1000; ++i) ledger = update_focus_layout(ledger, std::nullopt, 16, base).ledger;
    EXPECT_EQ(apply_focus(base, ledger), before);
}

TEST(Focus, ContinuousFocusGrowsOneClass) {
    const auto m = ids(5);
    const auto base = compute_tile_layout(m, m[0], 1920, 1080);
    auto ledger = make_focus_ledger(base);
    for (TimeMs t = 0; t < 3000; t += 10) ledger = update_focus_layout(ledger, m[3], 10, base).ledger;
    EXPECT_EQ(ledger.entries[m[3]].size, SizeClass::large);
    EXPECT_EQ(ledger.entries[m[3]].total_ms, 3000);
    EXPECT_THROW(update_focus_layout(ledger, m[3], 0, base), ConfigError);
}

TEST(Focus, LargeTileMigratesTowardCentre) {
    const auto m = ids(9); // 3x3, slot 4 is the centre
    const auto base = compute_tile_layout(m, m[0], 1920, 1080);
    auto ledger = make_focus_ledger(base);
    const auto ranking = center_ranking(base);
    EXPECT_EQ(ranking[0], 4u);
    for (int i = 0; i < 40; ++i) ledger = update_focus_layout(ledger, m[0], 3000, base).ledger;
    EXPECT_EQ(ledger.slots[4], m[0]);
    const auto focused = apply_focus(base, ledger);
    EXPECT_GT(min_tile_gap(focused), 0.0);
    EXPECT_EQ(focused.tiles[4].owner, m[0]);
}

TEST(Focus, ScheduleMatchesPerMillisecondAccumulation) {
    const auto m = ids(5);
    const auto base = compute_tile_layout(m, m[0], 1920, 1080);
    std::mt19937_64 rng(23);
    FocusConfig cfg;

    // oracle state: plain counters stepped one millisecond at a time
    std::map<ClientId, int> size, run, idle;
    std::map<ClientId, TimeMs> total;
    for (const auto& id : m) size[id] = 1, run[id] = 0, idle[id] = 0, total[id] = 0;

    auto ledger = make_focus_ledger(base);
    for (int seg = 0; seg < 200; ++seg) {
        const auto k = rng() % (m.size() + 1);
        const OptClient focus = k == m.size() ? OptClient{} : OptClient{m[k]};
        const TimeMs dur = 16 * static_cast<TimeMs>(1 + rng() % 400);
        for (TimeMs left = dur; left > 0; left -= 16)
            ledger = update_focus_layout(ledger, focus, 16, base, cfg).ledger;
        if (!focus) continue;
        for (TimeMs ms = 0; ms < dur; ++ms) {
            for (const auto& id : m) {
                if (id == *focus) {
                    ++total[id];
                    idle[id] = 0;
                    if (++run[id] == cfg.grow_ms) run[id] = 0, size[id] = std::min(2, size[id] + 1);
                } else {
                    run[id] = 0;
                    if (++idle[id] == cfg.shrink_idle_ms) idle[id] = 0, size[id] = std::max(0, size[id] - 1);
                }
            }
        }
    }
    for (const auto& id : m) {
        EXPECT_EQ(static_cast<int>(ledger.entries[id].size), size[id]) << id.str();
        EXPECT_EQ(ledger.entries[id].total_ms, total[id]);
    }
    EXPECT_GT(min_tile_gap(apply_focus(base, ledger, cfg)), 0.0);
}

// --- gaze share ------------------------------------------------------------------

TEST(GazeShare, Fractions) {
    const auto m = ids(5);
    std::vector<GazeEdge> none;
    EXPECT_DOUBLE_EQ(aggregate_gaze_share(none, m[0], 5), 0.0);
    std::vector<GazeEdge> all{{m[1], m[0]}, {m[2], m[0]}, {m[3], m[0]}, {m[4], m[0]}};
    EXPECT_DOUBLE_EQ(aggregate_gaze_share(all, m[0], 5), 1.0);
    std::vector<GazeEdge> half{{m[1], m[0]}, {m[2], m[0]}, {m[3], m[4]}, {m[4], std::nullopt}};
    EXPECT_DOUBLE_EQ(aggregate_gaze_share(half, m[0], 5), 0.5);
    EXPECT_THROW(aggregate_gaze_share(none, m[0], 1), ConfigError);
}

// --- serialization ---------------------------------------------------------------

TEST(FrameJson, RoundTripIsExact) {
    Scene scene;
    const auto m = ids(5);
    std::mt19937_64 rng(8);
    PoseState ps;
    for (TimeMs t = 0; t < 2000; t += 16) {
        EdgeMap e;
        for (const auto& s : m) e[s] = m[rng() % m.size()];
        scene.advance(m, e, {{m[0], 0.5}}, t);
        for (auto mode : {LayoutMode::directional, LayoutMode::perspective}) {
            const auto f = scene.render(m[1], mode, ps);
            const nlohmann::json j = f;
            const auto back = nlohmann::json::parse(j.dump()).get<RenderFrame>();
            ASSERT_EQ(back, f);
        }
    }
}

TEST(ConfigJson, PartialConfigKeepsDefaults) {
    RenderConfig c = nlohmann::json{{"screen_w", 1280}, {"envelope", {{"fade_in_ms", 100}}}};
    EXPECT_EQ(c.screen_w, 1280);
    EXPECT_EQ(c.screen_h, 1080);
    EXPECT_EQ(c.envelope.fade_in_ms, 100);
    EXPECT_EQ(c.envelope.fade_out_ms, 300);
    const nlohmann::json j = c;
    EXPECT_TRUE(j.get<RenderConfig>() == c);
}
