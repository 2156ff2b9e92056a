//! Minimal hand-rolled SVG output: a viewBox mapped from the data window,
//! polylines for trajectories, rects for census / sweep cells, and plain
//! axis ticks. All coordinates are written with fixed precision so that
//! identical inputs produce identical bytes.

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 40.0;

pub struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        // SVG y grows downward.
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

pub struct Document {
    body: String,
    frame: Frame,
}

impl Document {
    pub fn new(frame: Frame) -> Self {
        Self {
            body: String::new(),
            frame,
        }
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.4},{:.4}", self.frame.sx(x), self.frame.sy(y)))
            .collect();
        self.body.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"/>\n",
            color,
            coords.join(" ")
        ));
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let sx = self.frame.sx(x);
        let sy = self.frame.sy(y + h);
        let sw = self.frame.sx(x + w) - sx;
        let sh = self.frame.sy(y) - sy;
        self.body.push_str(&format!(
            "  <rect x=\"{sx:.4}\" y=\"{sy:.4}\" width=\"{sw:.4}\" height=\"{sh:.4}\" fill=\"{fill}\"/>\n"
        ));
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        self.body.push_str(&format!(
            "  <circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{r:.1}\" fill=\"{fill}\"/>\n",
            self.frame.sx(x),
            self.frame.sy(y)
        ));
    }

    fn axes(&self) -> String {
        let f = &self.frame;
        let mut out = String::new();
        out.push_str(&format!(
            "  <rect x=\"{:.4}\" y=\"{:.4}\" width=\"{:.4}\" height=\"{:.4}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
            MARGIN,
            MARGIN,
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        ));
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let x = f.x0 + t * (f.x1 - f.x0);
            let y = f.y0 + t * (f.y1 - f.y0);
            out.push_str(&format!(
                "  <line x1=\"{0:.4}\" y1=\"{1:.4}\" x2=\"{0:.4}\" y2=\"{2:.4}\" stroke=\"black\"/>\n",
                f.sx(x),
                H - MARGIN,
                H - MARGIN + 5.0
            ));
            out.push_str(&format!(
                "  <text x=\"{:.4}\" y=\"{:.4}\" font-size=\"10\" text-anchor=\"middle\">{:.4}</text>\n",
                f.sx(x),
                H - MARGIN + 16.0,
                x
            ));
            out.push_str(&format!(
                "  <line x1=\"{1:.4}\" y1=\"{0:.4}\" x2=\"{2:.4}\" y2=\"{0:.4}\" stroke=\"black\"/>\n",
                f.sy(y),
                MARGIN - 5.0,
                MARGIN
            ));
            out.push_str(&format!(
                "  <text x=\"{:.4}\" y=\"{:.4}\" font-size=\"10\" text-anchor=\"end\">{:.4}</text>\n",
                MARGIN - 7.0,
                f.sy(y) + 3.0,
                y
            ));
        }
        out
    }

    pub fn render(&self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" width=\"{W}\" height=\"{H}\">\n{}{}</svg>\n",
            self.body,
            self.axes()
        )
    }
}
