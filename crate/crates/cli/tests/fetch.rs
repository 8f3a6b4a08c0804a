use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use rmtfactor::fetch::{fetch_prices, FetchRequest};
use rmtfactor::CliError;

/// Serve `routes` (path -> JSON body) on a local port; unknown paths get 404.
/// Returns the base URL.
fn serve(routes: HashMap<String, String>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            if reader.read_line(&mut request_line).is_err() {
                continue;
            }
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
            }
            let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_owned();
            let route = path.split('?').next().unwrap_or("");
            let (status, body) = match routes.get(route) {
                Some(body) => ("200 OK", body.clone()),
                None => ("404 Not Found", String::from("missing")),
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    format!("http://{addr}")
}

fn series(stamps: &[i64], start: f64) -> String {
    let points: Vec<String> =
        stamps.iter().enumerate().map(|(i, t)| format!(r#"{{"t":{t},"p":{}}}"#, start + i as f64)).collect();
    format!("[{}]", points.join(","))
}

fn assets(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[test]
fn aligned_series_form_a_panel() {
    let stamps = [100, 200, 300, 400, 500];
    let base = serve(HashMap::from([
        ("/prices/AAA".to_owned(), series(&stamps, 10.0)),
        ("/prices/BBB".to_owned(), series(&stamps, 50.0)),
    ]));
    let table = fetch_prices(&FetchRequest::new(format!("{base}/prices/{{asset}}"), assets(&["AAA", "BBB"]))).unwrap();
    assert_eq!((table.n(), table.p()), (5, 2));
    assert_eq!(table.assets, assets(&["AAA", "BBB"]));
    assert_eq!(table.timestamps, stamps);
    assert_eq!(table.values[(4, 0)], 14.0);
    assert_eq!(table.values[(0, 1)], 50.0);
}

#[test]
fn range_filters_and_intersection_aligns() {
    let base = serve(HashMap::from([
        ("/a".to_owned(), series(&[100, 200, 300, 400, 500], 1.0)),
        ("/b".to_owned(), series(&[200, 300, 400, 500, 600], 1.0)),
    ]));
    let mut request = FetchRequest::new(format!("{base}/{{asset}}?from={{start}}&to={{end}}"), assets(&["a", "b"]));
    request.range = Some((250, 600));
    let table = fetch_prices(&request).unwrap();
    assert_eq!(table.timestamps, vec![300, 400, 500]);
}

#[test]
fn disjoint_timestamps_fail() {
    let base =
        serve(HashMap::from([("/a".to_owned(), series(&[1, 2, 3], 1.0)), ("/b".to_owned(), series(&[4, 5, 6], 1.0))]));
    let err = fetch_prices(&FetchRequest::new(format!("{base}/{{asset}}"), assets(&["a", "b"]))).unwrap_err();
    assert!(matches!(err, CliError::Core(rmtfactor_core::Error::EmptyIntersection)), "{err}");
}

#[test]
fn malformed_body_is_a_json_error() {
    let base = serve(HashMap::from([
        ("/a".to_owned(), series(&[1, 2, 3], 1.0)),
        ("/b".to_owned(), "<html>oops</html>".to_owned()),
    ]));
    let err = fetch_prices(&FetchRequest::new(format!("{base}/{{asset}}"), assets(&["a", "b"]))).unwrap_err();
    assert!(matches!(err, CliError::Json { .. }), "{err}");
    assert!(err.to_string().contains("`b`"));
}

#[test]
fn unknown_asset_is_reported_by_name() {
    let base = serve(HashMap::from([("/a".to_owned(), series(&[1, 2, 3], 1.0))]));
    let err = fetch_prices(&FetchRequest::new(format!("{base}/{{asset}}"), assets(&["a", "zzz"]))).unwrap_err();
    assert!(matches!(err, CliError::Http { .. }));
    assert!(err.to_string().contains("asset `zzz` not found"), "{err}");
}

#[test]
fn request_shape_is_checked_before_any_traffic() {
    let no_placeholder = FetchRequest::new("http://127.0.0.1:9/fixed", assets(&["a", "b"]));
    assert!(matches!(fetch_prices(&no_placeholder), Err(CliError::Config(_))));
    let one_asset = FetchRequest::new("http://127.0.0.1:9/{asset}", assets(&["a"]));
    assert!(matches!(fetch_prices(&one_asset), Err(CliError::Config(_))));
}
