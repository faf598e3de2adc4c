"""HTTP service layer: pydantic schemas, handlers and the FastAPI app."""
