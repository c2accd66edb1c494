/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // Never produced for valid runs; keeps the JSON parseable if it happens.
        "null".to_string()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "null".to_string())
}

/// Flat JSON object writer with fields in insertion order.
#[derive(Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn raw(mut self, key: &str, value: String) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn num(self, key: &str, x: f64) -> Self {
        self.raw(key, num(x))
    }

    pub fn int(self, key: &str, x: impl std::fmt::Display) -> Self {
        self.raw(key, x.to_string())
    }

    pub fn str(self, key: &str, s: &str) -> Self {
        self.raw(key, serde_json::Value::from(s).to_string())
    }

    pub fn finish(self) -> String {
        let body: Vec<String> =
            self.fields.iter().map(|(k, v)| format!("{}:{v}", serde_json::Value::from(k.as_str()))).collect();
        format!("{{{}}}", body.join(","))
    }
}
