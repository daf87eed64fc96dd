"""Shared record of acceptance-criterion outcomes, printed in the terminal summary."""
ACCEPTANCE = {}


def record(key, ok, detail=""):
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
