"""
Модуль наборов проверок команды verify
Каждый набор строит случайные данные из зерна прогона, сравнивает измеренные
величины с порогами из описания набора и возвращает SuiteReport
"""

import logging
from typing import Callable, Dict, List, Optional

import numpy as np

from src.config import default_tol, get_settings
from src.config_loader import SuiteConfig, SuitesConfig, get_suite_config, load_suite_configs
from src.hypercube import (
    check_symmetry,
    dh_apply,
    dh_compose,
    effect_after_map,
    forest_effect,
    forest_tensor,
    random_dh_state,
    random_generator_map,
    tree_on_bridge_effect,
    tree_on_bridge_tensor,
)
from src.interference import uniform_state
from src.karoubi import (
    causality_witness,
    classical_embed,
    classical_extract,
    decoh_map,
    hypdecoh_map,
    quantum_extract_map,
    quantum_extract_state,
    quantum_kraus_of_generator,
    quantum_lift_state,
)
from src.kernel import (
    ClassicalStructure,
    choi,
    choi_compose,
    computational_structure,
    fourier_structure,
    random_density_matrix,
    random_structure,
)
from src.logger import log_checks
from src.reports import CheckResult, SuiteReport, VerifyReport
from src.utils.generators import derive_seeds, make_rng, random_nonnegative_matrix

logger = logging.getLogger(__name__)

SUITE_NAMES = ["causality", "classical", "quantum", "idempotence", "symmetry", "extension"]
SUITE_CHECKS: Dict[str, List[str]] = {
    "causality": ["forest_normalisation", "tree_on_bridge_witness", "extension_witness"],
    "classical": ["embed_roundtrip", "composition", "extract_nonnegative"],
    "quantum": ["lift_roundtrip", "extract_psd", "functoriality", "kraus_oracle"],
    "idempotence": [
        "decoh_idempotent",
        "hypdecoh_idempotent",
        "decoh_factorization",
        "discard_factorization",
        "tree_uniform",
    ],
    "symmetry": ["symmetry_relations", "diagonal_nonnegative"],
    "extension": ["extension_nonnegative", "extension_uniform"],
}
MAP_TRIALS_LIMIT = 10
SQRT_WEIGHT_SAMPLES = 5


def _unmeasured(suite: SuiteConfig, name: str, tol: float) -> CheckResult:
    check = suite.get_check(name)
    return CheckResult.failed(name, check.kind, tol if check.threshold is None else check.threshold)


def _measure(suite: SuiteConfig, name: str, value: float, tol: float) -> CheckResult:
    """
    Сравнение измеренной величины с порогом проверки; вид сравнения
    (upper или lower) задается описанием набора, пустой порог заменяется допуском прогона
    """
    check = suite.get_check(name)
    threshold = tol if check.threshold is None else check.threshold
    if check.kind == "lower":
        return CheckResult.lower(name, value, threshold)
    return CheckResult.upper(name, value, threshold)


def _structures(d: int, seed: int) -> List[ClassicalStructure]:
    return [computational_structure(d), fourier_structure(d), random_structure(d, seed)]


def _relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def run_causality(d: int, trials: int, seed: int, tol: float, suite: SuiteConfig) -> SuiteReport:
    report = causality_witness(d, trials, seed, tol)
    checks = [
        _measure(suite, "forest_normalisation", report.forest_max_error, tol)
    ]
    for witness in report.witnesses:
        name = f"{witness.effect}_witness"
        checks.append(_measure(suite, name, witness.deviation, tol))
    notes = {"witnesses": [w.model_dump() for w in report.witnesses]}
    return SuiteReport(suite="causality", dim=d, trials=trials, seed=seed, tol=tol, checks=checks, notes=notes)


def run_symmetry(d: int, trials: int, seed: int, tol: float, suite: SuiteConfig) -> SuiteReport:
    """
    Симметрия состояний, построенных конструктивно: случайные сертификаты
    и их образы под изометрическими отображениями
    """
    max_deviation = 0.0
    diagonal_min = np.inf
    for index, trial_seed in enumerate(derive_seeds(seed, trials)):
        rho = random_dh_state(d, 1 + index % 4, trial_seed)
        if index % MAP_TRIALS_LIMIT == 0:
            phi = random_generator_map(d, d, 2, 2, trial_seed + 1, isometric=True)
            rho = dh_apply(phi, rho)
        report = check_symmetry(rho, tol)
        max_deviation = max(max_deviation, max(report.deviations.values()))
        diagonal_min = min(diagonal_min, report.diagonal_min)

    checks = [
        _measure(suite, "symmetry_relations", max_deviation, tol),
        _measure(suite, "diagonal_nonnegative", float(diagonal_min), tol),
    ]
    return SuiteReport(suite="symmetry", dim=d, trials=trials, seed=seed, tol=tol, checks=checks)


def run_extension(d: int, trials: int, seed: int, tol: float, suite: SuiteConfig) -> SuiteReport:
    structures = _structures(d, seed)
    min_value = np.inf
    for index, trial_seed in enumerate(derive_seeds(seed, trials)):
        rho = random_dh_state(d, 1 + index % 3, trial_seed)
        structure = structures[index % len(structures)]
        min_value = min(min_value, forest_effect(rho) - tree_on_bridge_effect(rho, structure))

    uniform = uniform_state(d)
    structure = computational_structure(d)
    uniform_value = forest_effect(uniform) - tree_on_bridge_effect(uniform, structure)
    uniform_error = abs(uniform_value - (1 - 1 / d))

    checks = [
        _measure(suite, "extension_nonnegative", float(min_value), tol),
        _measure(suite, "extension_uniform", uniform_error, tol),
    ]
    notes = {"uniform_value": uniform_value}
    return SuiteReport(suite="extension", dim=d, trials=trials, seed=seed, tol=tol, checks=checks, notes=notes)


def run_classical(d: int, trials: int, seed: int, tol: float, suite: SuiteConfig) -> SuiteReport:
    structures = _structures(d, seed)
    roundtrip_error = 0.0
    composition_error = 0.0
    min_entry = np.inf
    extract_errors: List[str] = []

    for index, trial_seed in enumerate(derive_seeds(seed, trials)):
        rng = make_rng(trial_seed)
        structure = structures[index % len(structures)]
        m1 = random_nonnegative_matrix(rng, d, d)
        embedded = classical_embed(m1, structure, structure)
        roundtrip_error = max(
            roundtrip_error, float(np.max(np.abs(classical_extract(embedded, structure, structure).mat - m1)))
        )

        if index < MAP_TRIALS_LIMIT:
            m2 = random_nonnegative_matrix(rng, d, d)
            composed = dh_compose(classical_embed(m2, structure, structure), embedded)
            extracted = classical_extract(composed, structure, structure).mat
            composition_error = max(composition_error, _relative_error(extracted, m2 @ m1))

            phi = random_generator_map(d, d, 2, 2, trial_seed + 1, isometric=True)
            try:
                min_entry = min(min_entry, float(np.min(classical_extract(phi, structure, structure).mat)))
            except ValueError as e:
                logger.error(f"Извлечение классического процесса не удалось: {str(e)}")
                extract_errors.append(str(e))

    checks = [
        _measure(suite, "embed_roundtrip", roundtrip_error, tol),
        _measure(suite, "composition", composition_error, tol),
        _unmeasured(suite, "extract_nonnegative", tol)
        if extract_errors
        else _measure(suite, "extract_nonnegative", float(min_entry), tol),
    ]
    notes = {"extract_errors": extract_errors} if extract_errors else {}
    return SuiteReport(suite="classical", dim=d, trials=trials, seed=seed, tol=tol, checks=checks, notes=notes)


def run_quantum(d: int, trials: int, seed: int, tol: float, suite: SuiteConfig) -> SuiteReport:
    """
    Восстановление квантовой теории: подъем и извлечение, положительность
    извлечения, функториальность извлечения отображений и сверка с операторами Крауса
    """
    structures = [computational_structure(d), fourier_structure(d)]
    idempotents = [hypdecoh_map(structure, d) for structure in structures]

    roundtrip_error = 0.0
    sqrt_weight_error = 0.0
    for index, trial_seed in enumerate(derive_seeds(seed, trials)):
        sigma = random_density_matrix(d, 1 + index % d, trial_seed)
        structure = structures[index % len(structures)]
        lifted = dh_apply(idempotents[index % len(structures)], quantum_lift_state(sigma, structure))
        recovered = quantum_extract_state(lifted, structure)
        roundtrip_error = max(roundtrip_error, float(np.max(np.abs(recovered.mat - sigma.mat))))
        if index < SQRT_WEIGHT_SAMPLES:
            naive = quantum_lift_state(sigma, structure, weight_exponent=0.5)
            naive_matrix = quantum_extract_state(naive, structure).mat
            sqrt_weight_error = max(sqrt_weight_error, float(np.max(np.abs(naive_matrix - sigma.mat))))

    min_eigenvalue = np.inf
    extract_errors: List[str] = []
    for trial_seed in derive_seeds(seed + 1, trials):
        rho = random_dh_state(d, 2, trial_seed)
        try:
            extracted = quantum_extract_state(rho)
            min_eigenvalue = min(min_eigenvalue, float(np.min(np.linalg.eigvalsh(extracted.mat))))
        except ValueError as e:
            logger.error(f"Извлечение квантового состояния не удалось: {str(e)}")
            extract_errors.append(str(e))

    functoriality_error = 0.0
    kraus_error = 0.0
    for trial_seed in derive_seeds(seed + 2, min(trials, MAP_TRIALS_LIMIT)):
        phi1 = random_generator_map(d, d, 2, 2, trial_seed, isometric=True)
        phi2 = random_generator_map(d, d, 1, 2, trial_seed + 1, isometric=True)
        hyp = idempotents[0]
        c1 = quantum_extract_map(phi1)
        c2 = quantum_extract_map(phi2)
        composed = quantum_extract_map(dh_compose(phi2, dh_compose(hyp, phi1)))
        functoriality_error = max(functoriality_error, _relative_error(composed, choi_compose(c2, c1, d, d, d)))
        kraus_error = max(kraus_error, _relative_error(c1, choi(quantum_kraus_of_generator(phi1))))

    checks = [
        _measure(suite, "lift_roundtrip", roundtrip_error, tol),
        _unmeasured(suite, "extract_psd", tol)
        if extract_errors
        else _measure(suite, "extract_psd", float(min_eigenvalue), tol),
        _measure(suite, "functoriality", functoriality_error, tol),
        _measure(suite, "kraus_oracle", kraus_error, tol),
    ]
    notes = {"lift_weight_exponent": 0.25, "sqrt_weight_roundtrip_error": sqrt_weight_error}
    if extract_errors:
        notes["extract_errors"] = extract_errors
    return SuiteReport(suite="quantum", dim=d, trials=trials, seed=seed, tol=tol, checks=checks, notes=notes)


def run_idempotence(d: int, trials: int, seed: int, tol: float, suite: SuiteConfig) -> SuiteReport:
    errors: Dict[str, float] = {
        "decoh_idempotent": 0.0,
        "hypdecoh_idempotent": 0.0,
        "decoh_factorization": 0.0,
        "discard_factorization": 0.0,
    }
    for structure in _structures(d, seed)[:2]:
        decoh = decoh_map(structure, d)
        hyp = hypdecoh_map(structure, d)
        pairs = {
            "decoh_idempotent": (dh_compose(decoh, decoh).tensor, decoh.tensor),
            "hypdecoh_idempotent": (dh_compose(hyp, hyp).tensor, hyp.tensor),
            "decoh_factorization": (dh_compose(decoh, hyp).tensor, decoh.tensor),
            "discard_factorization": (
                effect_after_map(forest_tensor(d), hyp).tensor,
                tree_on_bridge_tensor(structure).tensor,
            ),
        }
        for name, (measured, expected) in pairs.items():
            errors[name] = max(errors[name], float(np.max(np.abs(measured - expected))))

    tree_error = abs(tree_on_bridge_effect(uniform_state(d), computational_structure(d)) - 1 / d)
    checks = [_measure(suite, name, error, tol) for name, error in errors.items()]
    checks.append(_measure(suite, "tree_uniform", tree_error, tol))
    return SuiteReport(suite="idempotence", dim=d, trials=trials, seed=seed, tol=tol, checks=checks)


SUITE_RUNNERS: Dict[str, Callable[[int, int, int, float, SuiteConfig], SuiteReport]] = {
    "causality": run_causality,
    "classical": run_classical,
    "quantum": run_quantum,
    "idempotence": run_idempotence,
    "symmetry": run_symmetry,
    "extension": run_extension,
}


def _applicable(name: str, suite: SuiteConfig, d: int) -> bool:
    if name == "causality" and d < 2:
        return False
    return suite.max_dim is None or d <= suite.max_dim


def select_suites(name: str, d: int, config: SuitesConfig) -> List[SuiteConfig]:
    """
    Выбор наборов для прогона и проверка их описаний до начала вычислений

    Args:
        name: имя набора или "all"
        d: размерность
        config: описания наборов

    Returns:
        List[SuiteConfig]: применимые к d наборы в порядке SUITE_NAMES; при "all" неприменимые
            наборы пропускаются

    Raises:
        ValueError: неизвестный набор, набор без нужных проверок
            или размерность вне пределов набора
    """
    if name != "all" and name not in SUITE_RUNNERS:
        raise ValueError(f"Неизвестный набор проверок: {name}")

    selected = []
    for suite_name in SUITE_NAMES if name == "all" else [name]:
        suite = get_suite_config(suite_name, config)
        for check_name in SUITE_CHECKS[suite_name]:
            suite.get_check(check_name)
        if not _applicable(suite_name, suite, d):
            if name == "all":
                continue
            raise ValueError(f"Набор {suite_name} не применим к d={d}")
        selected.append(suite)
    return selected


def _failed_suite(suite_name: str, d: int, trials: int, seed: int, tol: float, error: Exception) -> SuiteReport:
    checks = [CheckResult.failed("suite_completed", "upper", 0.0)]
    notes = {"error": f"{type(error).__name__}: {error}"}
    return SuiteReport(suite=suite_name, dim=d, trials=trials, seed=seed, tol=tol, checks=checks, notes=notes)


def run_suites(
    name: str,
    d: int,
    seed: int,
    trials: Optional[int] = None,
    tol: Optional[float] = None,
    config: Optional[SuitesConfig] = None,
) -> VerifyReport:
    """
    Запуск одного набора проверок или всех сразу

    Ошибка численного кода внутри набора не прерывает прогон: набор
    попадает в отчет как не прошедший, текст ошибки - в его notes.

    Args:
        name: имя набора или "all"
        d: размерность
        seed: зерно прогона
        trials: число испытаний (по умолчанию из описания набора)
        tol: допуск прогона (численные предикаты и проверки без собственного порога)
        config: описания наборов (по умолчанию из DH_SUITES_DIR)

    Returns:
        VerifyReport: отчеты наборов

    Raises:
        ValueError: неизвестный набор или размерность вне пределов набора
    """
    if config is None:
        config = load_suite_configs(get_settings().DH_SUITES_DIR)
    tol = default_tol(tol)

    selected = select_suites(name, d, config)
    if name == "all":
        selected_names = {suite.name for suite in selected}
        for skipped in [suite_name for suite_name in SUITE_NAMES if suite_name not in selected_names]:
            logger.warning(f"Набор {skipped} пропущен для d={d}")

    reports = []
    for suite in selected:
        suite_trials = trials or suite.trials
        logger.info(f"Запуск набора {suite.name}: d={d}, испытаний {suite_trials}, зерно {seed}")
        try:
            report = SUITE_RUNNERS[suite.name](d, suite_trials, seed, tol, suite)
        except (ValueError, ArithmeticError, RuntimeError) as e:
            logger.error(f"Набор {suite.name} прерван ошибкой: {str(e)}")
            report = _failed_suite(suite.name, d, suite_trials, seed, tol, e)
        log_checks(suite.name, report.checks, {check.name: check.description for check in suite.checks})
        reports.append(report)

    return VerifyReport(dim=d, seed=seed, suites=reports, passed=all(r.passed for r in reports))
