//! Generators for every protocol message kind.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use dockpuzzle_core::engine::ChargeContribution;
use dockpuzzle_core::game::{GameConfig, QuizPrompt, RoundStat, RoundSummary, SoundCue};
use dockpuzzle_core::pipeline::{demo_script, simulate};
use dockpuzzle_core::protocol::{
    decode, Cue, ErrorBody, Explanation, GameOver, Hello, Info, Join, LifeLost, Message,
    ScoreUpdate, TickAck, WinAnimation,
};
use dockpuzzle_core::{InputEvent, ProtocolMessage, QuizBank, Tier};

/// Real snapshots taken from a simulated game.
pub fn snapshots() -> &'static Vec<Message> {
    static CELL: OnceLock<Vec<Message>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = simulate(
            Arc::new(super::fixture_pack()),
            Arc::new(QuizBank::sample()),
            GameConfig::default(),
            21,
            &demo_script("default"),
        );
        t.outbound
            .iter()
            .map(|l| decode(l).unwrap())
            .filter(|m| matches!(m.body, ProtocolMessage::Snapshot(_)))
            .collect()
    })
}

pub fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z_0-9]{0,12}",
        any::<String>(),
        Just("\"quoted\"\n\\".to_string())
    ]
}

pub fn tier() -> impl Strategy<Value = Tier> {
    prop_oneof![Just(Tier::Gcse), Just(Tier::ALevel)]
}

pub fn input() -> impl Strategy<Value = InputEvent> {
    prop_oneof![
        (any::<usize>(), finite(), finite()).prop_map(|(candidate, dx, dy)| InputEvent::Drag {
            candidate,
            dx,
            dy
        }),
        any::<usize>().prop_map(|candidate| InputEvent::DoubleTap { candidate }),
        proptest::option::of(any::<usize>())
            .prop_map(|candidate| InputEvent::SelectInfo { candidate }),
        any::<usize>().prop_map(|choice| InputEvent::AnswerQuiz { choice }),
        Just(InputEvent::SkipQuiz),
        Just(InputEvent::Dismiss),
    ]
}

pub fn stat() -> impl Strategy<Value = RoundStat> {
    (1u32..8, 0u32..6, finite(), any::<bool>(), any::<u64>()).prop_map(|(level, round, t, c, p)| {
        RoundStat {
            level,
            round,
            time_taken: t,
            first_selection_correct: c,
            points_awarded: p,
        }
    })
}

pub fn body() -> impl Strategy<Value = ProtocolMessage> {
    let level_spec = (0usize..7).prop_map(|i| dockpuzzle_core::game::level_table()[i]);
    prop_oneof![
        (
            text(),
            proptest::option::of(any::<u64>()),
            proptest::option::of(tier()),
            proptest::option::of(1u32..8)
        )
            .prop_map(
                |(pack_id, seed, tier, start_level)| ProtocolMessage::Join(Join {
                    pack_id,
                    seed,
                    tier,
                    start_level
                })
            ),
        input().prop_map(ProtocolMessage::Input),
        finite().prop_map(|dt| ProtocolMessage::TickAck(TickAck { dt })),
        (text(), any::<u64>(), level_spec).prop_map(|(pack_id, seed, level_spec)| {
            ProtocolMessage::Hello(Hello {
                protocol_version: 1,
                pack_id,
                seed,
                level_spec,
            })
        }),
        (0usize..10_000).prop_map(|i| {
            let all = snapshots();
            all[i % all.len()].body.clone()
        }),
        (
            any::<usize>(),
            finite(),
            finite(),
            proptest::collection::vec((0usize..9, finite(), finite()), 0..5)
        )
            .prop_map(|(candidate, percent, overlap_area, q)| {
                ProtocolMessage::ScoreUpdate(ScoreUpdate {
                    candidate,
                    percent,
                    overlap_area,
                    per_charge: q
                        .into_iter()
                        .map(
                            |(bridge_index, distance, contribution)| ChargeContribution {
                                bridge_index,
                                distance,
                                contribution,
                            },
                        )
                        .collect(),
                })
            }),
        prop_oneof![
            Just(SoundCue::Repulsion),
            Just(SoundCue::Win),
            Just(SoundCue::Weak),
            Just(SoundCue::LifeLost)
        ]
        .prop_map(|cue| ProtocolMessage::SoundCue(Cue { cue })),
        (any::<usize>(), text()).prop_map(|(candidate, entry)| ProtocolMessage::WinAnimation(
            WinAnimation { candidate, entry }
        )),
        stat().prop_map(ProtocolMessage::RoundEnd),
        any::<u32>()
            .prop_map(|lives_remaining| ProtocolMessage::LifeLost(LifeLost { lives_remaining })),
        (text(), tier(), text(), proptest::collection::vec(text(), 3)).prop_map(
            |(question_id, tier, prompt, choices)| {
                ProtocolMessage::Quiz(QuizPrompt {
                    question_id,
                    tier,
                    prompt,
                    choices,
                })
            }
        ),
        (text(), any::<bool>(), 0usize..3, text(), any::<u64>()).prop_map(
            |(question_id, correct, correct_index, explanation, points_awarded)| {
                ProtocolMessage::Explanation(Explanation {
                    question_id,
                    correct,
                    correct_index,
                    explanation,
                    points_awarded,
                })
            }
        ),
        (text(), text(), text()).prop_map(|(piece_id, display_name, blurb)| ProtocolMessage::Info(
            Info {
                piece_id,
                display_name,
                blurb
            }
        )),
        (
            1u32..8,
            any::<u64>(),
            finite(),
            finite(),
            proptest::collection::vec(stat(), 0..4)
        )
            .prop_map(|(level, total_points, mean_time, precision, rounds)| {
                ProtocolMessage::LevelEnd(RoundSummary {
                    level,
                    total_points,
                    mean_time,
                    precision,
                    rounds,
                })
            }),
        (any::<bool>(), any::<u64>())
            .prop_map(|(won, points)| ProtocolMessage::GameOver(GameOver { won, points })),
        (text(), text())
            .prop_map(|(code, message)| ProtocolMessage::Error(ErrorBody { code, message })),
    ]
}

pub fn message() -> impl Strategy<Value = Message> {
    (any::<u64>(), body()).prop_map(|(seq, body)| Message::new(seq, body))
}

/// Keys whose absence is legal.
pub fn optional(kind: &str, key: &str) -> bool {
    matches!(
        (kind, key),
        ("join", "seed" | "tier" | "start_level") | ("input", "candidate")
    ) || matches!((kind, key), ("snapshot", "selected" | "percent" | "quiz"))
}
