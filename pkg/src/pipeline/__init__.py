"""
Experiment run pipeline (LangGraph)
"""
