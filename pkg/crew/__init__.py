from crew.verification_crew import SUITES, VerificationCrew

__all__ = ["SUITES", "VerificationCrew"]
