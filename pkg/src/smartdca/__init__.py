"""Price-adaptive recurring-investment strategies and their generalized means.

The core library: modulators, Lehmer/quasi-Lehmer/quasi-Gini means, the
strategy family (RI / DCA / RHO / F_RHO_IN / F_RHO_OUT / SIG_PLUS), a
backtest engine, and executable inequality checks. A FastAPI service wraps
the library (smartdca.service) and the ``smartdca`` CLI is a thin client
over it.
"""

from .backtest import BacktestReport, ComparisonRow, Ledger, compare, run, sliding_windows
from .errors import (
    ConfigError,
    CounterexampleNotFound,
    DataError,
    DomainError,
    InvestmentCapError,
    SmartDcaError,
)
from .marketdata import BuySchedule, PriceSeries, load_csv, schedule_every, synth_uniform, write_csv
from .means import (
    lehmer_mean,
    quasi_gini,
    quasi_lehmer_expectation,
    quasi_lehmer_in,
    quasi_lehmer_moment,
    quasi_lehmer_out,
)
from .modulators import IDENTITY, SIGMOID, SIN1, TANH, Modulator, calibrate_sig_plus
from .proofs import (
    InequalityReport,
    cauchy_schwarz_check,
    find_in_counterexample,
    finite_difference_monotonicity,
    mu_n_closed_form,
    ordering_chain_check,
    run_verification,
    two_buy_closed_forms,
)
from .strategy import BuyOrder, StrategySpec, investment_amount, make_order, resolve_ref_price

__version__ = "0.1.0"
