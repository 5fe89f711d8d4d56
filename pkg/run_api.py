import uvicorn
from cat_state_lab.config.settings import SimulationConfig

if __name__ == "__main__":
    uvicorn.run(
        "cat_state_lab.api.app:app",
        host=SimulationConfig.API_HOST,
        port=SimulationConfig.API_PORT,
        reload=True
    )
