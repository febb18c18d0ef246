mod common;

use axum::http::StatusCode;
use serde_json::{json, Value};

use common::{app, call, corpus, sign_in, PASSWORD, USER};
use tweetinfo_core::filter::matches;
use tweetinfo_core::{FilterQuery, MetaInfo, Page};

async fn raw_sign_in(app: &axum::Router, username: &str, password: &str) -> (StatusCode, Vec<u8>) {
    use http_body_util::BodyExt;
    use tower::ServiceExt;
    let req = axum::http::Request::post("/api/session")
        .header("content-type", "application/json")
        .body(axum::body::Body::from(
            json!({"username": username, "password": password}).to_string(),
        ))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

#[tokio::test]
async fn sign_in_failures_are_byte_identical() {
    let app = app();
    let (s1, wrong_pw) = raw_sign_in(&app, USER, "nope").await;
    let (s2, no_user) = raw_sign_in(&app, "mallory", PASSWORD).await;
    assert_eq!(s1, StatusCode::UNAUTHORIZED);
    assert_eq!(s2, StatusCode::UNAUTHORIZED);
    assert_eq!(wrong_pw, no_user);
    let body: Value = serde_json::from_slice(&wrong_pw).unwrap();
    assert_eq!(body["code"], "INVALID_CREDENTIALS");
}

#[tokio::test]
async fn sign_in_returns_token_and_expiry() {
    let app = app();
    let (status, body) = call(
        &app,
        "POST",
        "/api/session",
        None,
        Some(json!({"username": USER, "password": PASSWORD})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["token"].as_str().unwrap().len() >= 43);
    let expires: chrono::DateTime<chrono::Utc> =
        body["expires_at"].as_str().unwrap().parse().unwrap();
    let ttl = expires - chrono::Utc::now();
    assert!(ttl > chrono::Duration::hours(23) && ttl <= chrono::Duration::hours(24));
}

#[tokio::test]
async fn malformed_sign_in_body() {
    let (status, body) = call(
        &app(),
        "POST",
        "/api/session",
        None,
        Some(json!({"user": USER})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "MALFORMED_REQUEST");
}

#[tokio::test]
async fn protected_routes_require_a_token() {
    let app = app();
    for (method, uri) in [
        ("GET", "/api/tweets"),
        ("GET", "/api/tweets?hate=yes&misinformation=yes"),
        ("GET", "/api/tweets/hate:1/meta"),
        ("POST", "/api/events/click"),
    ] {
        for token in [None, Some("not-a-token")] {
            let (status, body) = call(&app, method, uri, token, None).await;
            assert_eq!(status, StatusCode::UNAUTHORIZED, "{method} {uri}");
            assert_eq!(body["code"], "UNAUTHENTICATED");
        }
    }
}

#[tokio::test]
async fn default_timeline_matches_oracle() {
    let app = app();
    let token = sign_in(&app).await;
    let (status, body) = call(&app, "GET", "/api/tweets", Some(&token), None).await;
    assert_eq!(status, StatusCode::OK);
    let page: Page = serde_json::from_value(body).unwrap();
    let q = FilterQuery::default();
    let expected: Vec<_> = corpus().records.iter().filter(|r| matches(r, &q)).collect();
    assert_eq!(page.total_matching, expected.len());
    assert!(page.total_matching > 0);
    assert_eq!(page.page, 1);
    assert_eq!(page.page_size, 20);
    let got: Vec<_> = page.items.iter().map(|r| &r.id).collect();
    let want: Vec<_> = expected.iter().take(20).map(|r| &r.id).collect();
    assert_eq!(got, want);
}

#[tokio::test]
async fn filter_errors_use_registry_codes() {
    let app = app();
    let token = sign_in(&app).await;
    for (qs, code) in [
        ("hate=yes&misinformation=yes", "MUTUALLY_EXCLUSIVE_FILTERS"),
        ("hate=maybe", "INVALID_FILTER_VALUE"),
        ("colour=red", "INVALID_FILTER_VALUE"),
        ("bot=yes&bot=no", "INVALID_FILTER_VALUE"),
        ("page=0", "INVALID_PAGINATION"),
        ("page_size=101", "INVALID_PAGINATION"),
        ("page=abc", "INVALID_PAGINATION"),
    ] {
        let (status, body) = call(
            &app,
            "GET",
            &format!("/api/tweets?{qs}"),
            Some(&token),
            None,
        )
        .await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{qs}");
        assert_eq!(body["code"], code, "{qs}");
        assert!(body["message"].is_string());
    }
}

#[tokio::test]
async fn filtered_query_over_http() {
    let app = app();
    let token = sign_in(&app).await;
    let q: FilterQuery = FilterQuery::from_params([
        ("hate", "yes"),
        ("sentiment", "negative"),
        ("page_size", "100"),
    ])
    .unwrap();
    let (status, body) = call(
        &app,
        "GET",
        &format!("/api/tweets?{}", q.to_query_string()),
        Some(&token),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let page: Page = serde_json::from_value(body).unwrap();
    let expected = corpus().records.iter().filter(|r| matches(r, &q)).count();
    assert_eq!(page.total_matching, expected);
    assert!(page.items.iter().all(|r| matches(r, &q)));
}

#[tokio::test]
async fn positive_spanish_query() {
    let app = app();
    let token = sign_in(&app).await;
    let (status, body) = call(
        &app,
        "GET",
        "/api/tweets?sentiment=positive&language=es&page_size=100",
        Some(&token),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let page: Page = serde_json::from_value(body).unwrap();
    let want: Vec<_> = corpus()
        .records
        .iter()
        .filter(|r| {
            r.category == tweetinfo_core::Category::Normal
                && !r.is_bot
                && !r.verified
                && r.sentiment_label == tweetinfo_core::SentimentLabel::Positive
                && r.language == tweetinfo_core::Language::Es
        })
        .map(|r| r.id.clone())
        .collect();
    assert!(!want.is_empty());
    assert_eq!(page.total_matching, want.len());
    let got: Vec<_> = page.items.into_iter().map(|r| r.id).collect();
    assert_eq!(got, want[..want.len().min(100)]);
}

#[tokio::test]
async fn meta_for_known_and_unknown_ids() {
    let app = app();
    let token = sign_in(&app).await;
    let record = corpus()
        .records
        .iter()
        .find(|r| r.is_misinformation())
        .unwrap();
    let (status, body) = call(
        &app,
        "GET",
        &format!("/api/tweets/{}/meta", record.id),
        Some(&token),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let meta: MetaInfo = serde_json::from_value(body.clone()).unwrap();
    assert_eq!(meta, MetaInfo::from(record));
    assert_eq!(
        body["misinformation"]["fact_check_url"],
        json!(record.fact_check_url)
    );

    let (status, body) = call(
        &app,
        "GET",
        "/api/tweets/hate:does-not-exist/meta",
        Some(&token),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "NOT_FOUND");
}

fn click(seq: u64) -> Value {
    json!({
        "session_id": "s-1",
        "target": "meta_button",
        "tweet_id": "hate:1",
        "client_timestamp": "2026-03-01T12:00:00Z",
        "client_seq": seq,
    })
}

#[tokio::test]
async fn click_is_idempotent() {
    let app = app();
    let token = sign_in(&app).await;
    let (s1, first) = call(
        &app,
        "POST",
        "/api/events/click",
        Some(&token),
        Some(click(1)),
    )
    .await;
    let (s2, again) = call(
        &app,
        "POST",
        "/api/events/click",
        Some(&token),
        Some(click(1)),
    )
    .await;
    let (s3, other) = call(
        &app,
        "POST",
        "/api/events/click",
        Some(&token),
        Some(click(2)),
    )
    .await;
    assert_eq!(
        (s1, s2, s3),
        (
            StatusCode::ACCEPTED,
            StatusCode::ACCEPTED,
            StatusCode::ACCEPTED
        )
    );
    assert_eq!(first["duplicate"], false);
    assert_eq!(again["duplicate"], true);
    assert_eq!(first["receipt_id"], again["receipt_id"]);
    assert_ne!(first["receipt_id"], other["receipt_id"]);
}

#[tokio::test]
async fn malformed_clicks_are_rejected() {
    let app = app();
    let token = sign_in(&app).await;
    let mut missing_seq = click(1);
    missing_seq.as_object_mut().unwrap().remove("client_seq");
    let mut bad_time = click(1);
    bad_time["client_timestamp"] = json!("yesterday");
    let mut empty_target = click(1);
    empty_target["target"] = json!("");
    for body in [missing_seq, bad_time, empty_target, json!([1, 2])] {
        let (status, resp) = call(
            &app,
            "POST",
            "/api/events/click",
            Some(&token),
            Some(body.clone()),
        )
        .await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(resp["code"], "MALFORMED_EVENT");
    }
}

#[tokio::test]
async fn unknown_api_path_is_json_404() {
    let (status, body) = call(&app(), "GET", "/api/nothing", None, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "NOT_FOUND");
}

#[tokio::test]
async fn static_bundle_is_served_outside_api() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    let app = tweetinfo_api::with_static(app(), dir.path());
    let (status, body) = call(&app, "GET", "/", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!("<html>ui</html>"));
    let (status, _) = call(&app, "GET", "/timeline/deep/link", None, None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "GET", "/api/tweets", None, None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
}
