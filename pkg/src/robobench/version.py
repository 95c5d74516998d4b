VERSION = "0.1.0"
LOG_SCHEMA = "robobench.episode/1"
POLICY_SCHEMA = "robobench.policy/1"
REPORT_SCHEMA = "robobench.report/1"
