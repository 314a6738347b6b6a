mod common;

use proptest::prelude::*;
use serde_json::Value;

use common::messages::{message, optional};
use dockpuzzle_core::protocol::{decode, encode, ProtocolError};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn encode_decode_round_trips(msg in message()) {
        let line = encode(&msg);
        prop_assert!(!line.contains('\n'));
        let back = decode(&line).unwrap();
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(encode(&back), line);
    }

    #[test]
    fn damaged_payload_field_is_named(msg in message(), pick in any::<prop::sample::Index>(), drop in any::<bool>()) {
        let mut v: Value = serde_json::from_str(&encode(&msg)).unwrap();
        let kind = v["kind"].as_str().unwrap().to_string();
        let Some(obj) = v["payload"].as_object_mut() else { return Ok(()) };
        let keys: Vec<String> = obj.keys().filter(|k| *k != "type").cloned().collect();
        if keys.is_empty() {
            return Ok(());
        }
        let key = pick.get(&keys).clone();
        if drop {
            if optional(&kind, &key) {
                return Ok(());
            }
            obj.remove(&key);
        } else {
            let wrong = if obj[&key].is_boolean() { Value::from("x") } else { Value::Bool(true) };
            obj.insert(key.clone(), wrong);
        }
        let damaged = serde_json::to_string(&v).unwrap();
        match decode(&damaged) {
            Err(ProtocolError::SchemaViolation(path)) => {
                let want = format!("payload.{key}");
                prop_assert!(path == want || path.starts_with(&format!("{want}.")) || path.starts_with(&format!("{want}[")),
                    "{} -> {}", damaged, path);
            }
            Ok(m) => prop_assert!(false, "accepted {}: {:?}", damaged, m),
        }
    }
}

#[test]
fn envelope_damage_names_the_envelope_field() {
    let cases = [
        ("not json", "$"),
        ("[1,2]", "$"),
        (r#"{"kind":"join","payload":{"pack_id":"p"}}"#, "seq"),
        (
            r#"{"seq":-1,"kind":"join","payload":{"pack_id":"p"}}"#,
            "seq",
        ),
        (r#"{"seq":1,"payload":{}}"#, "kind"),
        (r#"{"seq":1,"kind":"teleport","payload":{}}"#, "kind"),
        (r#"{"seq":1,"kind":"join"}"#, "payload"),
        (
            r#"{"seq":1,"kind":"tick_ack","payload":{"dt":"soon"}}"#,
            "payload.dt",
        ),
        (
            r#"{"seq":1,"kind":"input","payload":{"type":"drag","candidate":0,"dx":1}}"#,
            "payload.dy",
        ),
        (
            r#"{"seq":1,"kind":"input","payload":{"type":"warp"}}"#,
            "payload.type",
        ),
    ];
    for (line, want) in cases {
        assert_eq!(
            decode(line),
            Err(ProtocolError::SchemaViolation(want.into())),
            "{line}"
        );
    }
}
