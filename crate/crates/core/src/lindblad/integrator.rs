//! Explicit adaptive Dormand–Prince 8(5,3) integrator for complex vector
//! ODEs. Coefficients, error norm and step control follow Hairer and
//! Wanner's DOP853; dense output is not needed because callers step
//! exactly onto every output and breakpoint time.

use crate::error::{Error, Result};
use crate::quantum::C64;

/// Right-hand side of y' = f(t, y).
pub trait OdeSystem {
    fn dim(&self) -> usize;
    /// Writes f(t, y) into `dy`. `window` is the integration segment
    /// containing `t`; piecewise-defined systems use it to pick the side of
    /// a discontinuity.
    fn rhs(&self, t: f64, window: (f64, f64), y: &[C64], dy: &mut [C64]);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dop853 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

impl StepStats {
    pub fn merge(&mut self, other: &StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evaluations += other.rhs_evaluations;
    }
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

impl Dop853 {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, max_step: f64::INFINITY, max_steps: 10_000_000 }
    }

    /// Integrates `y` in place from `t0` to `t1`. `h_guess` seeds the first
    /// step; the step size proposed after the final step is returned so
    /// consecutive segments can continue smoothly.
    pub fn integrate<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        h_guess: Option<f64>,
        stats: &mut StepStats,
    ) -> Result<f64> {
        let n = sys.dim();
        assert_eq!(y.len(), n);
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(h_guess.unwrap_or(0.0));
        }
        if !(span > 0.0) {
            return Err(Error::Integration { time: t0, reason: format!("end time {t1} precedes start") });
        }
        let window = (t0, t1);
        let h_max = self.max_step.min(span);
        let mut w = Workspace::new(n);
        sys.rhs(t0, window, y, &mut w.k1);
        stats.rhs_evaluations += 1;
        let mut h = match h_guess {
            Some(h) if h > 0.0 => h.min(h_max),
            _ => self.initial_step(sys, t0, window, y, &mut w, h_max, stats),
        };
        let mut t = t0;
        let mut steps = 0usize;
        let mut reject_streak = false;
        loop {
            if steps >= self.max_steps {
                return Err(Error::Integration { time: t, reason: format!("more than {} steps", self.max_steps) });
            }
            let h_floor = 1e-14 * t.abs().max(span);
            if h < h_floor {
                return Err(Error::Integration { time: t, reason: format!("step size underflow (h = {h:.3e})") });
            }
            let last = t + 1.01 * h >= t1;
            if last {
                h = t1 - t;
            }
            steps += 1;
            let err = self.attempt(sys, t, h, window, y, &mut w, stats);
            if !err.is_finite() {
                stats.rejected += 1;
                reject_streak = true;
                h *= 0.1;
                continue;
            }
            let fac11 = err.powf(0.125);
            let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            if err <= 1.0 {
                stats.accepted += 1;
                y.copy_from_slice(&w.y_new);
                std::mem::swap(&mut w.k1, &mut w.k_next);
                let mut h_new = (h / fac).min(h_max);
                if last {
                    return Ok(h_new);
                }
                t += h;
                if reject_streak {
                    h_new = h_new.min(h);
                }
                reject_streak = false;
                h = h_new;
            } else {
                stats.rejected += 1;
                reject_streak = true;
                h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            }
        }
    }

    fn scale(&self, a: C64, b: C64) -> f64 {
        self.abs_tol + self.rel_tol * a.norm().max(b.norm())
    }

    fn initial_step<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t0: f64,
        window: (f64, f64),
        y: &[C64],
        w: &mut Workspace,
        h_max: f64,
        stats: &mut StepStats,
    ) -> f64 {
        let n = y.len() as f64;
        let span = window.1 - window.0;
        let (mut dnf, mut dny) = (0.0, 0.0);
        for i in 0..y.len() {
            let sk = self.scale(y[i], y[i]);
            dnf += (w.k1[i].norm() / sk).powi(2);
            dny += (y[i].norm() / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 * span } else { 0.01 * (dny / dnf).sqrt() };
        h = h.min(h_max);
        for i in 0..y.len() {
            w.stage[i] = y[i] + w.k1[i] * h;
        }
        sys.rhs(t0 + h, window, &w.stage, &mut w.k2);
        stats.rhs_evaluations += 1;
        let mut der2 = 0.0;
        for i in 0..y.len() {
            let sk = self.scale(y[i], y[i]);
            der2 += ((w.k2[i] - w.k1[i]).norm() / sk).powi(2);
        }
        let der2 = (der2 / n).sqrt() / h;
        let der12 = der2.max((dnf / n).sqrt());
        let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6 * span) } else { (0.01 / der12).powf(0.125) };
        (100.0 * h).min(h1).min(h_max)
    }

    /// One trial step; fills `w.y_new` and `w.k_next` = f(t+h, y_new) and
    /// returns the scaled error norm.
    #[allow(clippy::too_many_arguments)]
    fn attempt<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t: f64,
        h: f64,
        window: (f64, f64),
        y: &[C64],
        w: &mut Workspace,
        stats: &mut StepStats,
    ) -> f64 {
        let n = y.len();
        macro_rules! stage {
            ($c:expr, $out:ident, [$(($coef:expr, $k:ident)),+]) => {{
                for i in 0..n {
                    w.stage[i] = y[i] + (C64::new(0.0, 0.0) $(+ w.$k[i] * $coef)+) * h;
                }
                sys.rhs(t + $c * h, window, &w.stage, &mut w.$out);
            }};
        }
        stage!(C2, k2, [(A21, k1)]);
        stage!(C3, k3, [(A31, k1), (A32, k2)]);
        stage!(C4, k4, [(A41, k1), (A43, k3)]);
        stage!(C5, k5, [(A51, k1), (A53, k3), (A54, k4)]);
        stage!(C6, k6, [(A61, k1), (A64, k4), (A65, k5)]);
        stage!(C7, k7, [(A71, k1), (A74, k4), (A75, k5), (A76, k6)]);
        stage!(C8, k8, [(A81, k1), (A84, k4), (A85, k5), (A86, k6), (A87, k7)]);
        stage!(C9, k9, [(A91, k1), (A94, k4), (A95, k5), (A96, k6), (A97, k7), (A98, k8)]);
        stage!(C10, k10, [(A101, k1), (A104, k4), (A105, k5), (A106, k6), (A107, k7), (A108, k8), (A109, k9)]);
        stage!(
            C11,
            k11,
            [(A111, k1), (A114, k4), (A115, k5), (A116, k6), (A117, k7), (A118, k8), (A119, k9), (A1110, k10)]
        );
        stage!(
            1.0,
            k12,
            [
                (A121, k1),
                (A124, k4),
                (A125, k5),
                (A126, k6),
                (A127, k7),
                (A128, k8),
                (A129, k9),
                (A1210, k10),
                (A1211, k11)
            ]
        );
        stats.rhs_evaluations += 11;

        let (mut err, mut err2) = (0.0, 0.0);
        for i in 0..n {
            let incr = w.k1[i] * B1
                + w.k6[i] * B6
                + w.k7[i] * B7
                + w.k8[i] * B8
                + w.k9[i] * B9
                + w.k10[i] * B10
                + w.k11[i] * B11
                + w.k12[i] * B12;
            let yn = y[i] + incr * h;
            w.y_new[i] = yn;
            let sk = self.scale(y[i], yn);
            let e2 = incr - w.k1[i] * BHH1 - w.k9[i] * BHH2 - w.k12[i] * BHH3;
            let e = w.k1[i] * ER1
                + w.k6[i] * ER6
                + w.k7[i] * ER7
                + w.k8[i] * ER8
                + w.k9[i] * ER9
                + w.k10[i] * ER10
                + w.k11[i] * ER11
                + w.k12[i] * ER12;
            err2 += (e2.norm() / sk).powi(2);
            err += (e.norm() / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err * (1.0 / (deno * n as f64)).sqrt();
        sys.rhs(t + h, window, &w.y_new, &mut w.k_next);
        stats.rhs_evaluations += 1;
        err
    }
}

struct Workspace {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    k5: Vec<C64>,
    k6: Vec<C64>,
    k7: Vec<C64>,
    k8: Vec<C64>,
    k9: Vec<C64>,
    k10: Vec<C64>,
    k11: Vec<C64>,
    k12: Vec<C64>,
    k_next: Vec<C64>,
    stage: Vec<C64>,
    y_new: Vec<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); n];
        Self {
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            k5: z(),
            k6: z(),
            k7: z(),
            k8: z(),
            k9: z(),
            k10: z(),
            k11: z(),
            k12: z(),
            k_next: z(),
            stage: z(),
            y_new: z(),
        }
    }
}

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

#[cfg(test)]
mod tests {
    use super::*;

    /// y' = i ω y, solution e^{iωt}.
    struct Rotor(f64);

    impl OdeSystem for Rotor {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, _w: (f64, f64), y: &[C64], dy: &mut [C64]) {
            dy[0] = C64::new(0.0, self.0) * y[0];
        }
    }

    /// y' = cos(t) y, solution exp(sin t): exercises explicit time dependence.
    struct Driven;

    impl OdeSystem for Driven {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, _w: (f64, f64), y: &[C64], dy: &mut [C64]) {
            dy[0] = y[0] * t.cos();
        }
    }

    #[test]
    fn rotor_matches_exponential() {
        let solver = Dop853::new(1e-12, 1e-14);
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut stats = StepStats::default();
        solver.integrate(&Rotor(3.0), 0.0, 10.0, &mut y, None, &mut stats).unwrap();
        let exact = C64::from_polar(1.0, 30.0);
        assert!((y[0] - exact).norm() < 1e-10, "{}", (y[0] - exact).norm());
        assert!(stats.accepted > 10);
    }

    #[test]
    fn explicit_time_dependence() {
        let solver = Dop853::new(1e-11, 1e-13);
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut stats = StepStats::default();
        let mut h = None;
        for k in 0..5 {
            h = Some(solver.integrate(&Driven, k as f64, k as f64 + 1.0, &mut y, h, &mut stats).unwrap());
        }
        assert!((y[0].re - 5f64.sin().exp()).abs() < 1e-9);
    }

    #[test]
    fn convergence_order() {
        // error shrinks roughly like tol when tightening
        let run = |tol: f64| {
            let solver = Dop853::new(tol, tol * 1e-2);
            let mut y = vec![C64::new(1.0, 0.0)];
            solver.integrate(&Rotor(1.0), 0.0, 20.0, &mut y, None, &mut StepStats::default()).unwrap();
            (y[0] - C64::from_polar(1.0, 20.0)).norm()
        };
        assert!(run(1e-10) < run(1e-6));
        assert!(run(1e-10) < 1e-8);
    }

    #[test]
    fn max_step_respected_and_backward_span_rejected() {
        let mut solver = Dop853::new(1e-6, 1e-8);
        solver.max_step = 0.01;
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut stats = StepStats::default();
        solver.integrate(&Rotor(0.0), 0.0, 1.0, &mut y, None, &mut stats).unwrap();
        assert!(stats.accepted >= 100);
        assert!(solver.integrate(&Rotor(0.0), 1.0, 0.0, &mut y, None, &mut stats).is_err());
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        let mut solver = Dop853::new(1e-12, 1e-14);
        solver.max_steps = 5;
        let mut y = vec![C64::new(1.0, 0.0)];
        let r = solver.integrate(&Rotor(100.0), 0.0, 10.0, &mut y, None, &mut StepStats::default());
        assert!(matches!(r, Err(Error::Integration { .. })));
    }
}
